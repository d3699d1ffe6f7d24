#include "gla/aeroelastic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>

namespace gla {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kGravity = 9.80665;

// Theodorsen flap constants for the canonical 20%-chord flap (hinge at 60% of
// the semichord aft of midchord). Effective values are scaled from these in
// proportion to the configured cl_delta so a single effectiveness knob drives
// the rotation, rate, and acceleration terms consistently.
constexpr double kT10Canonical = 1.7272952180016122;
constexpr double kT11Canonical = 0.9345409563865829;
constexpr double kT1Canonical = -0.0729561568278328;
constexpr double kT4Canonical = -0.4472952180016122;
}  // namespace

void WingConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("wing config: " + what);
  };
  require(semispan > 0.0, "semispan must be positive");
  require(chord > 0.0, "chord must be positive");
  require(elements >= 2, "element count must be at least 2");
  require(ei > 0.0, "bending stiffness EI must be positive");
  require(gj > 0.0, "torsional stiffness GJ must be positive");
  require(mass_per_length > 0.0, "mass per length must be positive");
  require(inertia_per_length > 0.0, "inertia per length must be positive");
  require(elastic_axis >= 0.0 && elastic_axis <= 1.0, "elastic_axis must be in [0, 1]");
  require(mass_axis >= 0.0 && mass_axis <= 1.0, "mass_axis must be in [0, 1]");
  require(flap_span > 0.0 && flap_span <= 1.0, "flap_span must be in (0, 1]");
  require(nonlinearity_coefficient >= 0.0, "nonlinearity_coefficient must be non-negative");
  require(rigid_mass > 0.0, "rigid_mass must be positive");
  require(pitch_inertia > 0.0, "pitch_inertia must be positive");
  require(pitch_stiffness >= 0.0, "pitch_stiffness must be non-negative");
  require(pitch_damping >= 0.0, "pitch_damping must be non-negative");
  // The nodal mass block [[m, -S], [-S, I]] must stay positive definite.
  const double d = (mass_axis - elastic_axis) * chord;
  require(inertia_per_length > mass_per_length * d * d,
          "inertia_per_length must exceed mass_per_length * (cg offset)^2");
}

void FlowConfig::validate() const {
  if (u_inf <= 0.0) throw ConfigError("flow config: U_inf must be positive");
  if (rho <= 0.0) throw ConfigError("flow config: rho must be positive");
  if (!std::isfinite(alpha0)) throw ConfigError("flow config: alpha0 must be finite");
}

IndicialApprox IndicialApprox::standard() {
  IndicialApprox ind;
  ind.wagner_terms = {{0.165, 0.0455}, {0.335, 0.3}};            // R.T. Jones
  ind.kussner_terms = {{0.5, 0.13}, {0.3, 1.0}, {0.2, 3.0}};     // three-term fit
  return ind;
}

void IndicialApprox::validate() const {
  if (wagner_terms.size() != 2) {
    throw ConfigError("indicial config: Wagner approximation must have exactly 2 terms");
  }
  if (kussner_terms.size() != 3) {
    throw ConfigError("indicial config: Kussner approximation must have exactly 3 terms");
  }
  double wagner_sum = 0.0;
  for (const auto& [coeff, expo] : wagner_terms) {
    if (expo <= 0.0) throw ConfigError("indicial config: Wagner exponents must be positive");
    wagner_sum += coeff;
  }
  if (std::abs(1.0 - wagner_sum - 0.5) > 1e-9) {
    throw ConfigError("indicial config: Wagner coefficients must give phi(0) = 1/2");
  }
  double kussner_sum = 0.0;
  for (const auto& [coeff, expo] : kussner_terms) {
    if (expo <= 0.0) throw ConfigError("indicial config: Kussner exponents must be positive");
    kussner_sum += coeff;
  }
  if (std::abs(1.0 - kussner_sum) > 1e-9) {
    throw ConfigError("indicial config: Kussner coefficients must give psi(0) = 0");
  }
}

double wagner_value(const IndicialApprox& ind, double reduced_time) {
  if (reduced_time < 0.0) throw ConfigError("wagner_value: reduced time must be non-negative");
  double v = 1.0;
  for (const auto& [coeff, expo] : ind.wagner_terms) v -= coeff * std::exp(-expo * reduced_time);
  return v;
}

double kussner_value(const IndicialApprox& ind, double reduced_time) {
  if (reduced_time < 0.0) throw ConfigError("kussner_value: reduced time must be non-negative");
  double v = 1.0;
  for (const auto& [coeff, expo] : ind.kussner_terms) v -= coeff * std::exp(-expo * reduced_time);
  return v;
}

namespace detail {

struct AeroInternals {
  WingConfig wing;
  FlowConfig flow;
  IndicialApprox ind;
  bool rigid = false;

  int S = 0;     // strips (= elements)
  int N = 0;     // free nodes
  int n = 0;     // state dimension
  int ndof = 0;  // acceleration DOF: 2N (+2 rigid)

  double h = 0.0;  // element length
  double b = 0.0;  // semichord
  double a = 0.0;  // elastic axis aft of midchord, in semichords
  double U = 0.0;
  double rho = 0.0;
  double qdyn = 0.0;

  MatrixXd Kw;   // N x N bending stiffness
  MatrixXd Kt;   // N x N torsion stiffness
  MatrixXd M;        // ndof x ndof, structural + aero apparent mass
  MatrixXd Mstruct;  // structural part only
  Eigen::LDLT<MatrixXd> Mfact;
  VectorXd grav_force;  // ndof generalized gravity force (zero when off)
  VectorXd flap_frac;   // per-strip flap coverage in [0, 1]

  // Effective Theodorsen flap constants.
  double t10 = 0.0, t11 = 0.0, t1 = 0.0, t4 = 0.0;
  double wagner_direct = 0.5;  // 1 - sum A_i

  // State indices.
  int lag(int strip, int k) const { return 5 * strip + k; }
  int iw(int i) const { return 5 * S + i; }
  int it(int i) const { return 5 * S + N + i; }
  int ivw(int i) const { return 5 * S + 2 * N + i; }
  int ivt(int i) const { return 5 * S + 3 * N + i; }
  int ir(int k) const { return 5 * S + 4 * N + k; }

  VectorXd residual(const VectorXd& x, const ControlInput& u_c, double w_g) const;
  VectorXd outputs(const VectorXd& x) const;
};

VectorXd AeroInternals::residual(const VectorXd& x, const ControlInput& u_c, double w_g) const {
  const double delta = u_c(0), delta_dot = u_c(1), delta_ddot = u_c(2);
  const double alpha0 = flow.alpha0;

  const double h_rate = rigid ? x(ir(0)) : 0.0;
  const double pitch = rigid ? x(ir(1)) : 0.0;
  const double pitch_rate = rigid ? x(ir(2)) : 0.0;

  VectorXd dx = VectorXd::Zero(n);
  VectorXd force = VectorXd::Zero(ndof);

  const double circ_gain = 2.0 * kPi * rho * U * U * b;  // per unit span, per rad
  const double arm_quarter = b * (a + 0.5);              // EA to aerodynamic centre
  const double arm_three_quarter = b * (0.5 - a);        // 3/4-chord to EA

  for (int j = 0; j < S; ++j) {
    // Midpoint values of element j; the root node is clamped.
    const double tl = (j == 0) ? 0.0 : x(it(j - 1));
    const double vl = (j == 0) ? 0.0 : x(ivw(j - 1));
    const double rl = (j == 0) ? 0.0 : x(ivt(j - 1));
    const double theta_e = 0.5 * (tl + x(it(j))) + pitch + alpha0;
    const double wdot_e = 0.5 * (vl + x(ivw(j))) + h_rate;
    const double tdot_e = 0.5 * (rl + x(ivt(j))) + pitch_rate;

    const double ff = flap_frac(j);
    const double alpha_eff = theta_e + (arm_three_quarter * tdot_e - wdot_e) / U +
                             ff * ((t10 / kPi) * delta + (t11 / (2.0 * kPi)) * (b / U) * delta_dot);

    // Lag-state dynamics (unit DC gain realization of the indicial functions).
    double alpha_circ = wagner_direct * alpha_eff;
    for (int k = 0; k < 2; ++k) {
      const auto& [coeff, expo] = ind.wagner_terms[static_cast<size_t>(k)];
      const double z = x(lag(j, k));
      dx(lag(j, k)) = (expo * U / b) * (alpha_eff - z);
      alpha_circ += coeff * z;
    }
    for (int k = 0; k < 3; ++k) {
      const auto& [coeff, expo] = ind.kussner_terms[static_cast<size_t>(k)];
      const double g = x(lag(j, 2 + k));
      dx(lag(j, 2 + k)) = (expo * U / b) * (w_g / U - g);
      alpha_circ += coeff * g;
    }

    const double lift_circ = circ_gain * alpha_circ;
    const double lift_nc = kPi * rho * b * b * U * tdot_e +
                           ff * (-rho * b * b * U * t4 * delta_dot - rho * b * b * b * t1 * delta_ddot);
    const double lift = lift_circ + lift_nc;

    const double moment = lift_circ * arm_quarter
                          - kPi * rho * b * b * b * U * (0.5 - a) * tdot_e
                          + ff * (qdyn * wing.chord * wing.chord *
                                      wing.flap_effectiveness.cm_delta * delta
                                  - arm_three_quarter *
                                        (-rho * b * b * U * t4 * delta_dot -
                                         rho * b * b * b * t1 * delta_ddot));

    // Distribute the strip load to the adjacent nodes (work-conjugate to the
    // midpoint interpolation), and to the rigid DOF.
    const double fl = 0.5 * h * lift;
    const double fm = 0.5 * h * moment;
    if (j > 0) {
      force(j - 1) += fl;
      force(N + j - 1) += fm;
    }
    force(j) += fl;
    force(N + j) += fm;
    if (rigid) {
      force(2 * N) += h * lift;
      force(2 * N + 1) += h * moment;
    }
  }

  // Elastic restoring forces; the bending force carries the cubic stiffening.
  Eigen::Map<const VectorXd> w_nodes(x.data() + iw(0), N);
  Eigen::Map<const VectorXd> t_nodes(x.data() + it(0), N);
  VectorXd elastic_w = Kw * w_nodes;
  const double eta = wing.nonlinearity_coefficient;
  if (eta != 0.0) {
    const double inv_len2 = 1.0 / (wing.semispan * wing.semispan);
    for (int i = 0; i < N; ++i) {
      elastic_w(i) *= 1.0 + eta * w_nodes(i) * w_nodes(i) * inv_len2;
    }
  }
  force.segment(0, N) -= elastic_w;
  force.segment(N, N) -= Kt * t_nodes;
  if (rigid) {
    force(2 * N + 1) -= wing.pitch_stiffness * pitch + wing.pitch_damping * pitch_rate;
  }
  force += grav_force;

  const VectorXd acc = Mfact.solve(force);

  for (int i = 0; i < N; ++i) {
    dx(iw(i)) = x(ivw(i));
    dx(it(i)) = x(ivt(i));
    dx(ivw(i)) = acc(i);
    dx(ivt(i)) = acc(N + i);
  }
  if (rigid) {
    dx(ir(0)) = acc(2 * N);
    dx(ir(1)) = pitch_rate;
    dx(ir(2)) = acc(2 * N + 1);
  }
  return dx;
}

VectorXd AeroInternals::outputs(const VectorXd& x) const {
  VectorXd y(3);
  y(0) = x(iw(N - 1));                          // wing-tip displacement [m]
  y(1) = wing.ei * 2.0 * x(iw(0)) / (h * h);    // root bending moment [N m]
  y(2) = (x(iw(N - 1)) - x(iw(N - 2))) / h;     // tip bending slope [rad]
  return y;
}

}  // namespace detail

AeroModel build_model(const WingConfig& wing, const FlowConfig& flow,
                      const IndicialApprox& indicial, bool rigid_body) {
  wing.validate();
  flow.validate();
  indicial.validate();

  auto impl = std::make_shared<detail::AeroInternals>();
  impl->wing = wing;
  impl->flow = flow;
  impl->ind = indicial;
  impl->rigid = rigid_body;
  impl->S = wing.elements;
  impl->N = wing.elements;
  impl->n = 5 * impl->S + 4 * impl->N + (rigid_body ? 3 : 0);
  impl->ndof = 2 * impl->N + (rigid_body ? 2 : 0);
  impl->h = wing.semispan / wing.elements;
  impl->b = wing.semichord();
  impl->a = 2.0 * wing.elastic_axis - 1.0;
  impl->U = flow.u_inf;
  impl->rho = flow.rho;
  impl->qdyn = 0.5 * flow.rho * flow.u_inf * flow.u_inf;

  const int N = impl->N, S = impl->S;
  const double h = impl->h;

  // Bending stiffness from the curvature-energy discretization:
  // U = 1/2 h sum EI kappa_i^2 with kappa at the clamped root using the
  // zero-slope ghost value. Free DOF are nodes 1..N (node 0 clamped).
  MatrixXd B = MatrixXd::Zero(N, N);
  B(0, 0) = 2.0 / (h * h);  // kappa at the root
  for (int i = 1; i < N; ++i) {
    if (i - 2 >= 0) B(i, i - 2) = 1.0 / (h * h);
    B(i, i - 1) = -2.0 / (h * h);
    B(i, i) = 1.0 / (h * h);
  }
  impl->Kw = wing.ei * h * (B.transpose() * B);

  // Torsion: linear elements, clamped root.
  impl->Kt = MatrixXd::Zero(N, N);
  for (int e = 0; e < S; ++e) {
    const double k = wing.gj / h;
    const int left = e - 1;   // free index of the element's left node
    const int right = e;      // free index of the right node
    impl->Kt(right, right) += k;
    if (left >= 0) {
      impl->Kt(left, left) += k;
      impl->Kt(left, right) -= k;
      impl->Kt(right, left) -= k;
    }
  }

  // Lumped nodal masses; the tip node carries half an element.
  const double d_cg = (wing.mass_axis - wing.elastic_axis) * wing.chord;
  VectorXd m_node(N), i_node(N), s_node(N);
  for (int i = 0; i < N; ++i) {
    const double frac = (i == N - 1) ? 0.5 : 1.0;
    m_node(i) = wing.mass_per_length * h * frac;
    i_node(i) = wing.inertia_per_length * h * frac;
    s_node(i) = wing.mass_per_length * d_cg * h * frac;
  }

  const int ndof = impl->ndof;
  MatrixXd Ms = MatrixXd::Zero(ndof, ndof);
  for (int i = 0; i < N; ++i) {
    Ms(i, i) = m_node(i);
    Ms(N + i, N + i) = i_node(i);
    Ms(i, N + i) = -s_node(i);
    Ms(N + i, i) = -s_node(i);
  }
  if (rigid_body) {
    const double wing_mass = m_node.sum();
    const double wing_inertia = i_node.sum();
    if (wing.rigid_mass <= wing_mass) {
      throw ConfigError("wing config: rigid_mass must exceed the lumped wing mass");
    }
    if (wing.pitch_inertia <= wing_inertia) {
      throw ConfigError("wing config: pitch_inertia must exceed the lumped wing inertia");
    }
    for (int i = 0; i < N; ++i) {
      Ms(i, 2 * N) = Ms(2 * N, i) = m_node(i);
      Ms(i, 2 * N + 1) = Ms(2 * N + 1, i) = -s_node(i);
      Ms(N + i, 2 * N) = Ms(2 * N, N + i) = -s_node(i);
      Ms(N + i, 2 * N + 1) = Ms(2 * N + 1, N + i) = i_node(i);
    }
    Ms(2 * N, 2 * N) = wing.rigid_mass;
    Ms(2 * N, 2 * N + 1) = Ms(2 * N + 1, 2 * N) = -s_node.sum();
    Ms(2 * N + 1, 2 * N + 1) = wing.pitch_inertia;
  }
  impl->Mstruct = Ms;

  // Flap coverage per strip: overlap of the strip with the outer flap_span.
  impl->flap_frac.resize(S);
  const double flap_start = wing.semispan * (1.0 - wing.flap_span);
  for (int j = 0; j < S; ++j) {
    const double y0 = j * h, y1 = (j + 1) * h;
    const double overlap = std::max(0.0, std::min(y1, wing.semispan) - std::max(y0, flap_start));
    impl->flap_frac(j) = overlap / h;
  }

  // Effective Theodorsen flap constants scaled by cl_delta (= 2 T10).
  const double scale = 0.5 * wing.flap_effectiveness.cl_delta / kT10Canonical;
  impl->t10 = 0.5 * wing.flap_effectiveness.cl_delta;
  impl->t11 = kT11Canonical * scale;
  impl->t1 = kT1Canonical * scale;
  impl->t4 = kT4Canonical * scale;

  double wagner_sum = 0.0;
  for (const auto& [coeff, expo] : indicial.wagner_terms) wagner_sum += coeff;
  impl->wagner_direct = 1.0 - wagner_sum;

  // Aerodynamic apparent mass folded into the mass matrix via the midpoint
  // interpolation operator.
  const double b2 = impl->b * impl->b;
  const double maa_ww = kPi * flow.rho * b2 * h;
  const double maa_wt = kPi * flow.rho * b2 * impl->b * impl->a * h;
  const double maa_tt = kPi * flow.rho * b2 * b2 * (0.125 + impl->a * impl->a) * h;
  MatrixXd P = MatrixXd::Zero(2 * S, ndof);
  for (int j = 0; j < S; ++j) {
    if (j > 0) {
      P(j, j - 1) = 0.5;
      P(S + j, N + j - 1) = 0.5;
    }
    P(j, j) = 0.5;
    P(S + j, N + j) = 0.5;
    if (rigid_body) {
      P(j, 2 * N) = 1.0;
      P(S + j, 2 * N + 1) = 1.0;
    }
  }
  MatrixXd Mblk = MatrixXd::Zero(2 * S, 2 * S);
  for (int j = 0; j < S; ++j) {
    Mblk(j, j) = maa_ww;
    Mblk(j, S + j) = Mblk(S + j, j) = maa_wt;
    Mblk(S + j, S + j) = maa_tt;
  }
  impl->M = Ms + P.transpose() * Mblk * P;
  impl->Mfact.compute(impl->M);
  if (impl->Mfact.info() != Eigen::Success) {
    throw NumericalError("build_model: mass matrix factorization failed");
  }

  // Generalized gravity force (constant).
  impl->grav_force = VectorXd::Zero(ndof);
  if (wing.gravity_on) {
    for (int i = 0; i < N; ++i) {
      impl->grav_force(i) = -m_node(i) * kGravity;
      impl->grav_force(N + i) = s_node(i) * kGravity;
    }
    if (rigid_body) {
      impl->grav_force(2 * N) = -wing.rigid_mass * kGravity;
      impl->grav_force(2 * N + 1) = s_node.sum() * kGravity;
    }
  }

  AeroModel model;
  model.impl_ = impl;
  model.fom_.n = impl->n;
  model.fom_.partition.aero = {0, 5 * S};
  model.fom_.partition.structural = {5 * S, 5 * S + 4 * N};
  model.fom_.partition.rigid_body = {5 * S + 4 * N, impl->n};
  model.fom_.partition.validate(impl->n);
  model.fom_.output_names = {"tip_displacement", "root_bending_moment", "tip_slope"};
  auto shared = std::shared_ptr<const detail::AeroInternals>(impl);
  model.fom_.residual = [shared](const VectorXd& w, const ControlInput& u_c, double u_d) {
    return shared->residual(w, u_c, u_d);
  };
  model.fom_.output_map = [shared](const VectorXd& w) { return shared->outputs(w); };
  return model;
}

const WingConfig& AeroModel::wing() const { return impl_->wing; }
const FlowConfig& AeroModel::flow() const { return impl_->flow; }
const IndicialApprox& AeroModel::indicial() const { return impl_->ind; }
bool AeroModel::has_rigid_body() const { return impl_->rigid; }
int AeroModel::strips() const { return impl_->S; }
int AeroModel::free_nodes() const { return impl_->N; }
int AeroModel::n() const { return impl_->n; }
int AeroModel::lag_index(int strip, int lag) const { return impl_->lag(strip, lag); }
int AeroModel::w_index(int node) const { return impl_->iw(node); }
int AeroModel::theta_index(int node) const { return impl_->it(node); }
int AeroModel::w_rate_index(int node) const { return impl_->ivw(node); }
int AeroModel::theta_rate_index(int node) const { return impl_->ivt(node); }
int AeroModel::rigid_index(int k) const { return impl_->ir(k); }
const MatrixXd& AeroModel::bending_stiffness() const { return impl_->Kw; }
const MatrixXd& AeroModel::torsion_stiffness() const { return impl_->Kt; }
const MatrixXd& AeroModel::mass_matrix() const { return impl_->Mstruct; }

double AeroModel::structural_energy(const VectorXd& state) const {
  const auto& im = *impl_;
  const int N = im.N;
  VectorXd qdot = VectorXd::Zero(im.ndof);
  for (int i = 0; i < N; ++i) {
    qdot(i) = state(im.ivw(i));
    qdot(N + i) = state(im.ivt(i));
  }
  if (im.rigid) {
    qdot(2 * N) = state(im.ir(0));
    qdot(2 * N + 1) = state(im.ir(2));
  }
  Eigen::Map<const VectorXd> w_nodes(state.data() + im.iw(0), N);
  Eigen::Map<const VectorXd> t_nodes(state.data() + im.it(0), N);
  double energy = 0.5 * qdot.dot(im.Mstruct * qdot);
  energy += 0.5 * w_nodes.dot(im.Kw * w_nodes);
  energy += 0.5 * t_nodes.dot(im.Kt * t_nodes);
  if (im.rigid) {
    const double pitch = state(im.ir(1));
    energy += 0.5 * im.wing.pitch_stiffness * pitch * pitch;
  }
  return energy;
}

StaticSolution solve_static(const AeroModel& model) {
  const auto& im = *model.impl_;
  const int S = im.S, N = im.N;
  const int nu = 5 * S + 2 * N;  // unknowns: lag states + nodal positions
  const ControlInput u0 = ControlInput::Zero();

  // Rows: lag-state equations plus the acceleration equations; velocities and
  // rigid-body states are held at zero.
  auto to_state = [&](const VectorXd& u) {
    VectorXd x = VectorXd::Zero(im.n);
    x.segment(0, 5 * S) = u.segment(0, 5 * S);
    x.segment(im.iw(0), 2 * N) = u.segment(5 * S, 2 * N);
    return x;
  };
  auto restricted = [&](const VectorXd& u) {
    const VectorXd r = im.residual(to_state(u), u0, 0.0);
    VectorXd rr(nu);
    rr.segment(0, 5 * S) = r.segment(0, 5 * S);
    rr.segment(5 * S, N) = r.segment(im.ivw(0), N);
    rr.segment(5 * S + N, N) = r.segment(im.ivt(0), N);
    return rr;
  };

  VectorXd u = VectorXd::Zero(nu);
  VectorXd r = restricted(u);
  const double scale = std::max(1.0, r.norm());
  const double tol = 1e-11;
  const int max_iter = 60;

  int it = 0;
  for (; it < max_iter; ++it) {
    if (r.norm() / scale <= tol) break;
    MatrixXd J(nu, nu);
    for (int j = 0; j < nu; ++j) {
      const double hstep = std::max(1e-6, 1e-6 * std::abs(u(j)));
      VectorXd up = u, um = u;
      up(j) += hstep;
      um(j) -= hstep;
      J.col(j) = (restricted(up) - restricted(um)) / (2.0 * hstep);
    }
    Eigen::FullPivLU<MatrixXd> lu(J);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
      throw NumericalError(
          "solve_static: singular static Jacobian; dynamic pressure is at or above "
          "static divergence");
    }
    const VectorXd step = lu.solve(-r);
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      const VectorXd u_try = u + alpha * step;
      const VectorXd r_try = restricted(u_try);
      if (r_try.allFinite() && r_try.norm() < r.norm()) {
        u = u_try;
        r = r_try;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      throw NumericalError(
          "solve_static: Newton iteration diverged; dynamic pressure is at or above "
          "static divergence");
    }
  }
  if (r.norm() / scale > tol) {
    throw ConvergenceError("solve_static: no convergence after " + std::to_string(max_iter) +
                               " iterations",
                           r.norm() / scale);
  }

  StaticSolution sol;
  sol.bending = u.segment(5 * S, N);
  sol.twist = u.segment(5 * S + N, N);
  sol.tip_displacement = sol.bending(N - 1);
  sol.tip_twist = sol.twist(N - 1);
  sol.iterations = it;
  sol.state = to_state(u);
  return sol;
}

}  // namespace gla
