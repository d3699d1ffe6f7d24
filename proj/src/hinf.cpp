#include "gla/hinf.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gla {

MatrixXcd frequency_response(const StateSpaceSystem& sys, double omega) {
  const int n = sys.states();
  const Complex s(0.0, omega);
  const MatrixXcd resolvent =
      (s * MatrixXcd::Identity(n, n) - sys.A.cast<Complex>()).partialPivLu().solve(
          sys.B.cast<Complex>());
  return sys.C.cast<Complex>() * resolvent + sys.D.cast<Complex>();
}

double singular_value_at(const StateSpaceSystem& sys, double omega) {
  const MatrixXcd g = frequency_response(sys, omega);
  Eigen::JacobiSVD<MatrixXcd> svd(g);
  return svd.singularValues()(0);
}

namespace {

// Swaps the diagonal entries k and k+1 of the complex Schur form T (with the
// unitary accumulator U) by a Givens-type rotation.
void swap_schur_entries(MatrixXcd& T, MatrixXcd& U, int k) {
  const Complex a = T(k, k);
  const Complex b = T(k, k + 1);
  const Complex d = T(k + 1, k + 1);
  const Complex diff = d - a;
  const double r = std::sqrt(std::norm(b) + std::norm(diff));
  if (r < 1e-300) return;  // equal eigenvalues with no coupling: nothing to do
  MatrixXcd G(2, 2);
  G(0, 0) = b / r;
  G(1, 0) = diff / r;
  G(0, 1) = -std::conj(diff) / r;
  G(1, 1) = std::conj(b) / r;
  T.middleCols(k, 2).applyOnTheRight(G);
  T.middleRows(k, 2).applyOnTheLeft(G.adjoint());
  U.middleCols(k, 2).applyOnTheRight(G);
  T(k + 1, k) = 0.0;
}

struct CareResult {
  bool ok = false;
  std::string message;
  MatrixXd X;
};

// Stabilizing solution of A'X + XA - X S X + Q = 0 for symmetric S, Q (S may
// be indefinite, as required by the synthesis Riccati equations). Ordered
// complex Schur decomposition of the Hamiltonian [[A, -S], [-Q, -A']].
CareResult care_hamiltonian(const MatrixXd& A, const MatrixXd& S, const MatrixXd& Q) {
  CareResult out;
  const int n = static_cast<int>(A.rows());
  MatrixXd H(2 * n, 2 * n);
  H << A, -S, -Q, -A.transpose();

  Eigen::ComplexSchur<MatrixXcd> schur(H.cast<Complex>(), /*computeU=*/true);
  if (schur.info() != Eigen::Success) {
    out.message = "Schur decomposition failed";
    return out;
  }
  MatrixXcd T = schur.matrixT();
  MatrixXcd U = schur.matrixU();

  double scale = 0.0;
  for (int i = 0; i < 2 * n; ++i) scale = std::max(scale, std::abs(T(i, i)));
  const double axis_tol = 1e-10 * std::max(1.0, scale);

  int stable = 0;
  for (int i = 0; i < 2 * n; ++i) {
    const double re = T(i, i).real();
    if (std::abs(re) < axis_tol) {
      out.message = "Hamiltonian eigenvalue within 1e-10 of the imaginary axis; no "
                    "stabilizing solution";
      return out;
    }
    if (re < 0.0) ++stable;
  }
  if (stable != n) {
    out.message = "Hamiltonian does not split into n stable / n antistable eigenvalues";
    return out;
  }

  // Bubble the stable eigenvalues into the leading block.
  int target = 0;
  for (int i = 0; i < 2 * n; ++i) {
    if (T(i, i).real() < 0.0) {
      for (int k = i; k > target; --k) swap_schur_entries(T, U, k - 1);
      ++target;
    }
  }

  const MatrixXcd U1 = U.topLeftCorner(n, n);
  const MatrixXcd U2 = U.bottomLeftCorner(n, n);
  Eigen::FullPivLU<MatrixXcd> lu(U1);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    out.message = "stable invariant subspace has a singular basis (U1 not invertible)";
    return out;
  }
  const MatrixXcd Xc = U2 * lu.inverse();
  MatrixXd X = Xc.real();
  X = 0.5 * (X + X.transpose());
  out.ok = true;
  out.X = X;
  return out;
}

double care_residual(const MatrixXd& A, const MatrixXd& S, const MatrixXd& Q,
                     const MatrixXd& X) {
  const MatrixXd res = A.transpose() * X + X * A - X * S * X + Q;
  return res.norm() / std::max(1.0, X.norm());
}

bool is_hurwitz(const MatrixXd& A, double margin = 0.0) {
  const Eigen::VectorXcd eigs = A.eigenvalues();
  for (int i = 0; i < eigs.size(); ++i) {
    if (eigs(i).real() >= -margin) return false;
  }
  return true;
}

}  // namespace

MatrixXd solve_care(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n) throw DimensionError("solve_care: A must be square");
  if (B.rows() != n) throw DimensionError("solve_care: B row count mismatch");
  if (Q.rows() != n || Q.cols() != n) throw DimensionError("solve_care: Q dimension mismatch");
  if (R.rows() != B.cols() || R.cols() != B.cols()) {
    throw DimensionError("solve_care: R dimension mismatch");
  }
  if ((Q - Q.transpose()).norm() > 1e-10 * std::max(1.0, Q.norm())) {
    throw NumericalError("solve_care: Q must be symmetric");
  }
  if ((R - R.transpose()).norm() > 1e-10 * std::max(1.0, R.norm())) {
    throw NumericalError("solve_care: R must be symmetric");
  }
  Eigen::LLT<MatrixXd> llt(R);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("solve_care: R must be positive definite");
  }
  const MatrixXd S = B * llt.solve(B.transpose());

  const CareResult res = care_hamiltonian(A, S, Q);
  if (!res.ok) throw NumericalError("solve_care: " + res.message);

  const double rnorm = care_residual(A, S, Q, res.X);
  if (rnorm >= 1e-8) {
    throw NumericalError("solve_care: residual " + std::to_string(rnorm) + " exceeds 1e-8");
  }
  if (!is_hurwitz(A - S * res.X)) {
    throw NumericalError("solve_care: closed loop A - B R^{-1} B' X is not Hurwitz");
  }
  return res.X;
}

namespace {

// True when the level-gamma Hamiltonian has eigenvalues on the imaginary axis,
// i.e. sigma_max(G(jw)) crosses gamma. Fills `crossings` with the candidate
// frequencies.
bool gain_crosses_level(const StateSpaceSystem& sys, double gamma,
                        std::vector<double>* crossings) {
  const int n = sys.states();
  const int m = sys.inputs();
  const MatrixXd R = gamma * gamma * MatrixXd::Identity(m, m) - sys.D.transpose() * sys.D;
  Eigen::LLT<MatrixXd> llt(R);
  if (llt.info() != Eigen::Success) return true;  // gamma below sigma_max(D)
  const MatrixXd Rinv_Dt_C = llt.solve(sys.D.transpose() * sys.C);
  const MatrixXd Abar = sys.A + sys.B * Rinv_Dt_C;
  const MatrixXd BRB = sys.B * llt.solve(sys.B.transpose());
  const MatrixXd CC =
      sys.C.transpose() *
      (MatrixXd::Identity(sys.outputs(), sys.outputs()) + sys.D * llt.solve(sys.D.transpose())) *
      sys.C;
  MatrixXd M(2 * n, 2 * n);
  M << Abar, BRB, -CC, -Abar.transpose();

  const Eigen::VectorXcd eigs = M.eigenvalues();
  const double tol = 1e-9 * std::max(1.0, M.norm());
  bool found = false;
  for (int i = 0; i < eigs.size(); ++i) {
    if (std::abs(eigs(i).real()) < tol) {
      found = true;
      if (crossings && eigs(i).imag() >= 0.0) crossings->push_back(eigs(i).imag());
    }
  }
  return found;
}

}  // namespace

HinfNormResult hinf_norm(const StateSpaceSystem& sys, double rel_tol) {
  const int n = sys.states();
  if (n > 0 && !is_hurwitz(sys.A)) {
    throw NumericalError("hinf_norm: A is not Hurwitz; the norm is infinite");
  }

  HinfNormResult result;
  Eigen::JacobiSVD<MatrixXd> dsvd(sys.D);
  const double sigma_d = sys.D.size() > 0 && sys.D.norm() > 0.0 ? dsvd.singularValues()(0) : 0.0;

  // Probe frequencies: DC, resonances of A, and a log sweep around them.
  std::vector<double> probes{0.0};
  double wmax = 1.0;
  if (n > 0) {
    const Eigen::VectorXcd eigs = sys.A.eigenvalues();
    for (int i = 0; i < eigs.size(); ++i) {
      const double mag = std::abs(eigs(i));
      probes.push_back(mag);
      if (std::abs(eigs(i).imag()) > 0.0) probes.push_back(std::abs(eigs(i).imag()));
      wmax = std::max(wmax, mag);
    }
    for (double w = 1e-3 * wmax; w <= 1e2 * wmax; w *= 2.0) probes.push_back(w);
  }

  double lo = sigma_d;
  for (double w : probes) {
    const double s = singular_value_at(sys, w);
    if (s > lo) {
      lo = s;
      result.peak_frequency = w;
    }
  }
  if (lo <= 0.0) return result;  // identically zero system

  double hi = std::max(2.0 * lo, sigma_d * (1.0 + 1e-6) + 1e-300);
  int guard = 0;
  while (gain_crosses_level(sys, hi, nullptr)) {
    hi *= 2.0;
    if (++guard > 120) {
      throw NumericalError("hinf_norm: upper bound search failed to converge");
    }
  }

  while (hi - lo > rel_tol * lo) {
    const double mid = 0.5 * (lo + hi);
    std::vector<double> crossings;
    if (gain_crosses_level(sys, mid, &crossings)) {
      double best = mid;
      // Polish the lower bound with direct gain evaluations at the crossing
      // frequencies and their midpoints.
      std::sort(crossings.begin(), crossings.end());
      std::vector<double> candidates = crossings;
      for (size_t i = 0; i + 1 < crossings.size(); ++i) {
        candidates.push_back(0.5 * (crossings[i] + crossings[i + 1]));
      }
      for (double w : candidates) {
        const double s = singular_value_at(sys, w);
        if (s > best) {
          best = s;
          result.peak_frequency = w;
        }
      }
      lo = best;
    } else {
      hi = mid;
    }
  }
  result.value = 0.5 * (lo + hi);
  return result;
}

namespace {

struct NormalizedSynthesis {
  MatrixXd A, B1, B2h, C1, C2h;
  double d12_scale = 1.0;  // sqrt(D12' D12)
  double d21_scale = 1.0;  // sqrt(D21 D21')
};

NormalizedSynthesis normalize_plant(const GeneralizedPlant& p) {
  const double tol = 1e-9;
  if (p.D11.norm() > tol * std::max(1.0, p.C1.norm())) {
    throw NumericalError("synthesize: D11 must be zero for this plant family");
  }
  if (p.D22.norm() > 0.0) {
    throw NumericalError("synthesize: D22 must be zero");
  }
  if (p.B2.cols() != 1 || p.C2.rows() != 1) {
    throw NumericalError("synthesize: expected a single control input and measurement");
  }
  const double k = p.D12.col(0).norm();
  const double e = p.D21.row(0).norm();
  if (k <= 0.0) throw NumericalError("synthesize: D12 must have full column rank");
  if (e <= 0.0) throw NumericalError("synthesize: D21 must have full row rank");
  if ((p.D12.transpose() * p.C1).norm() > tol * std::max(1.0, p.C1.norm()) * k) {
    throw NumericalError("synthesize: D12' C1 must vanish (control row of C1 nonzero)");
  }
  if ((p.B1 * p.D21.transpose()).norm() > tol * std::max(1.0, p.B1.norm()) * e) {
    throw NumericalError("synthesize: B1 D21' must vanish (noise channel feeds the states)");
  }
  NormalizedSynthesis nz;
  nz.A = p.A;
  nz.B1 = p.B1;
  nz.B2h = p.B2 / k;
  nz.C1 = p.C1;
  nz.C2h = p.C2 / e;
  nz.d12_scale = k;
  nz.d21_scale = e;
  return nz;
}

struct FeasibilityResult {
  bool feasible = false;
  std::string reason;
  MatrixXd X, Y;
};

FeasibilityResult probe_gamma(const NormalizedSynthesis& nz, double gamma) {
  FeasibilityResult out;
  const double g2inv = 1.0 / (gamma * gamma);
  const MatrixXd Sx = nz.B2h * nz.B2h.transpose() - g2inv * (nz.B1 * nz.B1.transpose());
  const MatrixXd Qx = nz.C1.transpose() * nz.C1;
  const CareResult xres = care_hamiltonian(nz.A, Sx, Qx);
  if (!xres.ok) {
    out.reason = "X Riccati: " + xres.message;
    return out;
  }
  const MatrixXd Sy = nz.C2h.transpose() * nz.C2h - g2inv * (nz.C1.transpose() * nz.C1);
  const MatrixXd Qy = nz.B1 * nz.B1.transpose();
  const CareResult yres = care_hamiltonian(nz.A.transpose(), Sy, Qy);
  if (!yres.ok) {
    out.reason = "Y Riccati: " + yres.message;
    return out;
  }
  const auto min_eig = [](const MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    return es.eigenvalues()(0);
  };
  const double tol_psd = -1e-8 * std::max(1.0, xres.X.norm());
  if (min_eig(xres.X) < tol_psd) {
    out.reason = "X not positive semidefinite";
    return out;
  }
  if (min_eig(yres.X) < -1e-8 * std::max(1.0, yres.X.norm())) {
    out.reason = "Y not positive semidefinite";
    return out;
  }
  const Eigen::VectorXcd xy_eigs = (xres.X * yres.X).eigenvalues();
  double rho = 0.0;
  for (int i = 0; i < xy_eigs.size(); ++i) rho = std::max(rho, std::abs(xy_eigs(i)));
  if (rho >= gamma * gamma) {
    out.reason = "spectral radius rho(XY) >= gamma^2";
    return out;
  }
  out.feasible = true;
  out.X = xres.X;
  out.Y = yres.X;
  return out;
}

Controller central_controller(const NormalizedSynthesis& nz, double gamma,
                              const FeasibilityResult& fr) {
  const int n = static_cast<int>(nz.A.rows());
  const double g2inv = 1.0 / (gamma * gamma);
  const MatrixXd F = -nz.B2h.transpose() * fr.X;
  const MatrixXd L = -fr.Y * nz.C2h.transpose();
  const MatrixXd Z = (MatrixXd::Identity(n, n) - g2inv * fr.Y * fr.X).inverse();
  Controller k;
  k.A_k = nz.A + g2inv * (nz.B1 * nz.B1.transpose()) * fr.X + nz.B2h * F + Z * L * nz.C2h;
  k.B_k = -(Z * L) / nz.d21_scale;
  k.C_k = F / nz.d12_scale;
  k.D_k = MatrixXd::Zero(1, 1);
  k.gamma_star = gamma;
  return k;
}

}  // namespace

bool gamma_feasible(const GeneralizedPlant& plant, double gamma) {
  if (gamma <= 0.0) return false;
  const NormalizedSynthesis nz = normalize_plant(plant);
  return probe_gamma(nz, gamma).feasible;
}

Controller synthesize(const GeneralizedPlant& plant, double gamma_tolerance) {
  if (gamma_tolerance <= 0.0 || gamma_tolerance >= 1.0) {
    throw ConfigError("synthesize: gamma_tolerance must be in (0, 1)");
  }
  const NormalizedSynthesis nz = normalize_plant(plant);
  const int n = plant.states();

  // Probe the open-loop w -> z gain directly (works with marginal open-loop
  // eigenvalues since only nonzero frequencies matter for the scale).
  StateSpaceSystem wz{plant.A, plant.B1, plant.C1, plant.D11};
  double probe_gain = 0.0;
  double wmax = 1.0;
  const Eigen::VectorXcd eigs = plant.A.eigenvalues();
  for (int i = 0; i < eigs.size(); ++i) wmax = std::max(wmax, std::abs(eigs(i)));
  for (double w = 1e-4 * wmax; w <= 10.0 * wmax; w *= 1.5) {
    probe_gain = std::max(probe_gain, singular_value_at(wz, w));
  }
  (void)n;

  double gamma_hi = 1e3 * std::max(probe_gain, 1e-12);
  std::vector<std::pair<double, bool>> tested;

  FeasibilityResult hi_result = probe_gamma(nz, gamma_hi);
  tested.emplace_back(gamma_hi, hi_result.feasible);
  int doublings = 0;
  while (!hi_result.feasible) {
    if (++doublings > 10) {
      throw NumericalError("synthesize: infeasible up to gamma = " + std::to_string(gamma_hi) +
                           " (" + hi_result.reason + "); check plant assumptions");
    }
    gamma_hi *= 2.0;
    hi_result = probe_gamma(nz, gamma_hi);
    tested.emplace_back(gamma_hi, hi_result.feasible);
  }

  double gamma_lo = std::max(1e-9 * gamma_hi, 1e-12);
  FeasibilityResult lo_result = probe_gamma(nz, gamma_lo);
  tested.emplace_back(gamma_lo, lo_result.feasible);
  if (lo_result.feasible) {
    // Nothing to regulate; doing (almost) nothing is optimal.
    return central_controller(nz, gamma_lo, lo_result);
  }

  FeasibilityResult best = hi_result;
  double best_gamma = gamma_hi;
  while (gamma_hi - gamma_lo > gamma_tolerance * gamma_hi) {
    const double mid = std::sqrt(gamma_lo * gamma_hi);
    const FeasibilityResult fr = probe_gamma(nz, mid);
    tested.emplace_back(mid, fr.feasible);
    if (fr.feasible) {
      gamma_hi = mid;
      best = fr;
      best_gamma = mid;
    } else {
      gamma_lo = mid;
    }
  }

  // Feasibility must be monotone in gamma over everything we probed.
  std::sort(tested.begin(), tested.end());
  for (size_t i = 1; i < tested.size(); ++i) {
    if (tested[i - 1].second && !tested[i].second) {
      throw NumericalError("synthesize: non-monotone gamma feasibility detected near gamma = " +
                           std::to_string(tested[i].first));
    }
  }

  return central_controller(nz, best_gamma, best);
}

StateSpaceSystem close_loop(const GeneralizedPlant& p, const Controller& k) {
  if (p.D22.norm() > 0.0) {
    if ((p.D22 * k.D_k).norm() > 0.0) {
      throw NumericalError("close_loop: algebraic loop (D22 D_k != 0)");
    }
  }
  const int n = p.states();
  const int nk = k.order();
  const int nw = static_cast<int>(p.B1.cols());
  const int nzp = static_cast<int>(p.C1.rows());

  StateSpaceSystem cl;
  cl.A.resize(n + nk, n + nk);
  cl.A << p.A + p.B2 * k.D_k * p.C2, p.B2 * k.C_k, k.B_k * p.C2, k.A_k;
  cl.B.resize(n + nk, nw);
  cl.B << p.B1 + p.B2 * k.D_k * p.D21, k.B_k * p.D21;
  cl.C.resize(nzp, n + nk);
  cl.C << p.C1 + p.D12 * k.D_k * p.C2, p.D12 * k.C_k;
  cl.D = p.D11 + p.D12 * k.D_k * p.D21;
  return cl;
}

StateSpaceSystem close_loop(const AugmentedPlant& p, const Controller& k) {
  const int n = p.states();
  const int nk = k.order();
  const int nz = static_cast<int>(p.C_z.rows());

  StateSpaceSystem cl;
  cl.A.resize(n + nk, n + nk);
  cl.A << p.A_p + p.B_u * k.D_k * p.C_y, p.B_u * k.C_k, k.B_k * p.C_y, k.A_k;
  cl.B.resize(n + nk, 1);
  cl.B << p.B_w, MatrixXd::Zero(nk, 1);
  // Outputs: performance rows, measurement row, then the actuator states.
  cl.C = MatrixXd::Zero(nz + 3, n + nk);
  cl.C.topLeftCorner(nz, n) = p.C_z;
  cl.C.block(nz, 0, 1, n) = p.C_y;
  cl.C(nz + 1, n - 2) = 1.0;  // delta
  cl.C(nz + 2, n - 1) = 1.0;  // delta_dot
  cl.D = MatrixXd::Zero(nz + 3, 1);
  return cl;
}

void save_controller(const Controller& k, const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& metadata) {
  std::ofstream os(path);
  if (!os) throw ConfigError("save_controller: cannot open '" + path + "'");
  const int n = k.order();
  os << "glactl 1\n";
  os << "order " << n << " inputs " << k.B_k.cols() << " outputs " << k.C_k.rows() << "\n";
  os << "gamma_star " << std::setprecision(17) << k.gamma_star << "\n";
  auto write_matrix = [&os](const std::string& name, const MatrixXd& m) {
    os << name << " " << m.rows() << " " << m.cols() << "\n";
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        os << std::setprecision(17) << m(i, j) << (j + 1 == m.cols() ? "\n" : " ");
      }
    }
  };
  write_matrix("A_k", k.A_k);
  write_matrix("B_k", k.B_k);
  write_matrix("C_k", k.C_k);
  write_matrix("D_k", k.D_k);
  for (const auto& [key, value] : metadata) {
    os << "meta " << key << " " << value << "\n";
  }
  if (!os) throw ConfigError("save_controller: write failed for '" + path + "'");
}

Controller load_controller(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("load_controller: cannot open '" + path + "'");
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "glactl" || version != 1) {
    throw ConfigError("load_controller: '" + path + "' is not a glactl v1 file");
  }
  std::string tok;
  int order = 0, inputs = 0, outputs = 0;
  if (!(is >> tok >> order) || tok != "order") throw ConfigError("load_controller: bad header");
  if (!(is >> tok >> inputs) || tok != "inputs") throw ConfigError("load_controller: bad header");
  if (!(is >> tok >> outputs) || tok != "outputs") {
    throw ConfigError("load_controller: bad header");
  }
  Controller k;
  if (!(is >> tok >> k.gamma_star) || tok != "gamma_star") {
    throw ConfigError("load_controller: missing gamma_star");
  }
  auto read_matrix = [&is, &path](const std::string& expect) {
    std::string name;
    int rows = 0, cols = 0;
    if (!(is >> name >> rows >> cols) || name != expect) {
      throw ConfigError("load_controller: expected matrix '" + expect + "' in '" + path + "'");
    }
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        if (!(is >> m(i, j))) throw ConfigError("load_controller: truncated matrix " + expect);
      }
    }
    return m;
  };
  k.A_k = read_matrix("A_k");
  k.B_k = read_matrix("B_k");
  k.C_k = read_matrix("C_k");
  k.D_k = read_matrix("D_k");
  return k;
}

}  // namespace gla
