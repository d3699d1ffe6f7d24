#pragma once

#include <string>
#include <vector>

#include "gla/gla_plant.hpp"
#include "gla/statespace.hpp"

namespace gla {

// Plain state-space quadruple y = C x + D u, dx/dt = A x + B u.
struct StateSpaceSystem {
  MatrixXd A, B, C, D;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  int outputs() const { return static_cast<int>(C.rows()); }
};

// C (jw I - A)^{-1} B + D.
MatrixXcd frequency_response(const StateSpaceSystem& sys, double omega);

// Largest singular value of the frequency response at omega.
double singular_value_at(const StateSpaceSystem& sys, double omega);

// Stabilizing solution of A'X + XA - X B R^{-1} B' X + Q = 0 via the ordered
// Schur form of the Hamiltonian. Throws NumericalError when Hamiltonian
// eigenvalues sit within 1e-10 (relative) of the imaginary axis or the
// residual exceeds 1e-8.
MatrixXd solve_care(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R);

struct HinfNormResult {
  double value = 0.0;
  double peak_frequency = 0.0;  // rad/s
};

// H-infinity norm by Hamiltonian bisection to the given relative tolerance.
// Throws NumericalError if A is not Hurwitz.
HinfNormResult hinf_norm(const StateSpaceSystem& sys, double rel_tol = 1e-6);

struct Controller {
  MatrixXd A_k, B_k, C_k, D_k;
  double gamma_star = 0.0;

  int order() const { return static_cast<int>(A_k.rows()); }
};

// Central two-Riccati controller at the smallest feasible gamma found by
// bisection (relative tolerance gamma_tolerance). The returned gamma_star is
// the achieved bound.
Controller synthesize(const GeneralizedPlant& plant, double gamma_tolerance = 1e-3);

// Feasibility of the two-Riccati conditions at a fixed gamma. Used by the
// bisection and exposed for the boundary self-test.
bool gamma_feasible(const GeneralizedPlant& plant, double gamma);

// Lower LFT of the generalized plant with the controller; the result maps the
// disturbance inputs to the performance outputs.
StateSpaceSystem close_loop(const GeneralizedPlant& plant, const Controller& controller);

// Closed loop of the augmented plant: input w_g, outputs
// [performance rows, measurement row, delta, delta_dot].
StateSpaceSystem close_loop(const AugmentedPlant& plant, const Controller& controller);

// Controller file round-trip, including gamma_star and free-form metadata.
void save_controller(const Controller& controller, const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& metadata = {});
Controller load_controller(const std::string& path);

}  // namespace gla
