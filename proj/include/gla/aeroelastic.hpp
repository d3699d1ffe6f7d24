#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "gla/statespace.hpp"

namespace gla {

// Trailing-edge flap effectiveness derivatives, per rad.
struct FlapEffectiveness {
  double cl_delta = 3.0;
  double cm_delta = -0.55;
};

struct WingConfig {
  double semispan = 16.0;           // m
  double chord = 1.0;               // m
  int elements = 20;                // spanwise segments (strips)
  double ei = 5.0e5;                // bending stiffness [N m^2]
  double gj = 1.0e5;                // torsional stiffness [N m^2]
  double mass_per_length = 5.0;     // kg/m
  double inertia_per_length = 0.3;  // kg m, about the elastic axis
  double elastic_axis = 0.35;       // chordwise position, fraction of chord
  double mass_axis = 0.45;          // CG chordwise position, fraction of chord
  double flap_span = 0.3;           // outer span fraction carrying the flap
  FlapEffectiveness flap_effectiveness;
  double nonlinearity_coefficient = 10.0;  // cubic stiffening scale
  bool gravity_on = false;

  // Rigid-body (plunge/pitch) parameters, used when the model is built with
  // the rigid-body flag. rigid_mass and pitch_inertia are totals including
  // the wing; the pitch spring/damper stand in for the absent empennage.
  double rigid_mass = 100.0;      // kg
  double pitch_inertia = 300.0;   // kg m^2
  double pitch_stiffness = 3000;  // N m / rad
  double pitch_damping = 1000;    // N m s / rad

  double semichord() const { return 0.5 * chord; }
  void validate() const;
};

struct FlowConfig {
  double u_inf = 59.0;   // m/s
  double rho = 0.0789;   // kg/m^3
  double alpha0 = 0.0;   // trim angle of attack [rad]
  void validate() const;
};

// Exponential indicial-function approximations in reduced time s = U t / b.
// wagner(s) = 1 - sum A_i exp(-b_i s), kussner(s) = 1 - sum C_k exp(-e_k s).
// Coefficients are configuration data; construction enforces the asymptotes
// wagner(0) = 1/2 and kussner(0) = 0, and exactly three Kussner terms.
struct IndicialApprox {
  std::vector<std::pair<double, double>> wagner_terms;   // (A_i, b_i)
  std::vector<std::pair<double, double>> kussner_terms;  // (C_k, e_k), 3 entries

  static IndicialApprox standard();
  void validate() const;
};

// Lift deficiency factor; throws on negative reduced time.
double wagner_value(const IndicialApprox& ind, double reduced_time);
// Gust penetration factor; throws on negative reduced time.
double kussner_value(const IndicialApprox& ind, double reduced_time);

namespace detail {
struct AeroInternals;
}

struct StaticSolution {
  VectorXd bending;  // nodal w over free nodes [m]
  VectorXd twist;    // nodal theta over free nodes [rad]
  double tip_displacement = 0.0;
  double tip_twist = 0.0;
  int iterations = 0;
  // Full-order state with the deflection field, steady lag states, zero rates.
  VectorXd state;
};

// Assembled desk-scale aeroelastic model. State layout:
//   [ per-strip lag states (2 Wagner + 3 Kussner) x strips |
//     nodal w, nodal theta, nodal w-rate, nodal theta-rate (root clamped) |
//     optional plunge rate, pitch, pitch rate ]
// The embedded FullOrderModel is the generic contract consumed by the rest of
// the pipeline; the accessors expose assembly data for validation.
class AeroModel {
 public:
  AeroModel() = default;

  const FullOrderModel& fom() const { return fom_; }
  const WingConfig& wing() const;
  const FlowConfig& flow() const;
  const IndicialApprox& indicial() const;
  bool has_rigid_body() const;

  int strips() const;
  int free_nodes() const;
  int n() const;

  // Index helpers into the state vector.
  int lag_index(int strip, int lag) const;  // lag in [0,5): 2 Wagner then 3 Kussner
  int w_index(int node) const;              // node in [0, free_nodes)
  int theta_index(int node) const;
  int w_rate_index(int node) const;
  int theta_rate_index(int node) const;
  int rigid_index(int k) const;  // k in [0,3): plunge rate, pitch, pitch rate

  // Structural operators over free nodal DOF [w..., theta...] (+ plunge,
  // pitch when rigid); used by the physics validation tests.
  const MatrixXd& bending_stiffness() const;
  const MatrixXd& torsion_stiffness() const;
  const MatrixXd& mass_matrix() const;

  // Total mechanical energy of the structural subsystem (kinetic + elastic
  // strain), ignoring aerodynamic apparent-mass contributions.
  double structural_energy(const VectorXd& state) const;

 private:
  friend AeroModel build_model(const WingConfig&, const FlowConfig&, const IndicialApprox&, bool);
  friend StaticSolution solve_static(const AeroModel&);
  std::shared_ptr<const detail::AeroInternals> impl_;
  FullOrderModel fom_;
};

AeroModel build_model(const WingConfig& wing, const FlowConfig& flow,
                      const IndicialApprox& indicial, bool rigid_body);

// Newton solve of the zero-rate residual (positions and steady lag states as
// unknowns, rigid-body states frozen at zero). Throws NumericalError when the
// solve diverges, which at high dynamic pressure indicates static divergence.
StaticSolution solve_static(const AeroModel& model);

}  // namespace gla
