#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "gla/errors.hpp"

namespace gla {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Complex = std::complex<double>;

// Flap input triple (delta [rad], delta_dot [rad/s], delta_ddot [rad/s^2]).
using ControlInput = Eigen::Vector3d;

struct IndexRange {
  int begin = 0;
  int end = 0;  // exclusive
  int size() const { return end - begin; }
};

// Labelled state layout of a full-order model. Ranges are disjoint and cover
// exactly [0, n); rigid_body may be empty.
struct StatePartition {
  IndexRange aero;
  IndexRange structural;
  IndexRange rigid_body;

  void validate(int n) const;
};

// Nonlinear first-order system dw/dt = R(w, u_c, u_d) with a declared state
// layout and a physical output map.
struct FullOrderModel {
  int n = 0;
  std::function<VectorXd(const VectorXd& w, const ControlInput& u_c, double u_d)> residual;
  StatePartition partition;
  std::function<VectorXd(const VectorXd& w)> output_map;
  std::vector<std::string> output_names;
};

struct TrimState {
  VectorXd w0;
  double alpha0 = 0.0;         // trim angle of attack [rad]
  double residual_norm = 0.0;  // relative to the load scale, dimensionless
  int iterations = 0;
};

// Linearization about a trim point: dw/dt = A w + B_c d + B_c1 d' + B_c2 d'' + B_g w_g.
struct LinearizedSystem {
  MatrixXd A;
  VectorXd B_c;   // flap rotation column
  VectorXd B_c1;  // flap rate column
  VectorXd B_c2;  // flap acceleration column
  VectorXd B_g;   // gust column, per m/s
  MatrixXd C;     // output rows
};

// Full spectrum with biorthonormal left/right eigenvector sets:
// Psi^H Phi = I. Right vectors have unit 2-norm; complex eigenvalues appear in
// adjacent conjugate pairs (positive imaginary part first) with exactly
// conjugate vectors.
struct EigenDecomposition {
  VectorXcd eigenvalues;
  MatrixXcd right_vectors;  // Phi, n x n
  MatrixXcd left_vectors;   // Psi, n x n

  int size() const { return static_cast<int>(eigenvalues.size()); }
  bool is_real_mode(int k) const { return eigenvalues(k).imag() == 0.0; }
  // Index of the conjugate partner, or -1 for a real mode.
  int conjugate_partner(int k) const;
};

struct TrimOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;  // relative to the load scale
  int max_backtracks = 30;
};

// Evaluates dw/dt. Throws DimensionError on a state-size mismatch and
// NumericalError on non-finite inputs.
VectorXd evaluate_residual(const FullOrderModel& model, const VectorXd& w,
                           const ControlInput& u_c, double u_d);

// Damped Newton iteration (backtracking line search) on the residual restricted
// to `free_variables`, with zero control and zero disturbance. The load scale
// is max(1, ||R(guess)||).
TrimState solve_trim(const FullOrderModel& model, const VectorXd& guess,
                     const std::vector<int>& free_variables, const TrimOptions& opts = {});

// Central finite differences of the residual about the trim point, per-component
// step h_i = max(1e-6, 1e-6 |w0_i|). Input columns are differenced in their
// channels; C comes from differencing the output map.
LinearizedSystem compute_jacobian(const FullOrderModel& model, const TrimState& trim);

// Full eigen-decomposition with left vectors scaled so Psi^H Phi = I.
// Throws NumericalError if the eigenvector matrix has condition number > 1e12
// (defective or near-defective input).
EigenDecomposition eig_biorthonormal(const MatrixXd& A);

// Checks the decomposition invariants against A (biorthonormality, per-pair
// eigen-residual, conjugate pairing). Throws NumericalError on violation.
void check_eig_invariants(const EigenDecomposition& dec, const MatrixXd& A,
                          double tol = 1e-8);

}  // namespace gla
