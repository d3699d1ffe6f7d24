#include "gla/statespace.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gla {

void StatePartition::validate(int n) const {
  const IndexRange ranges[] = {aero, structural, rigid_body};
  std::vector<char> covered(static_cast<size_t>(n), 0);
  for (const auto& r : ranges) {
    if (r.begin > r.end || r.begin < 0 || r.end > n) {
      throw DimensionError("state_partition: range [" + std::to_string(r.begin) + ", " +
                           std::to_string(r.end) + ") out of bounds for n = " + std::to_string(n));
    }
    for (int i = r.begin; i < r.end; ++i) {
      if (covered[static_cast<size_t>(i)]) {
        throw DimensionError("state_partition: ranges overlap at index " + std::to_string(i));
      }
      covered[static_cast<size_t>(i)] = 1;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!covered[static_cast<size_t>(i)]) {
      throw DimensionError("state_partition: index " + std::to_string(i) + " uncovered");
    }
  }
}

int EigenDecomposition::conjugate_partner(int k) const {
  if (is_real_mode(k)) return -1;
  // Pairs are stored adjacently, positive imaginary part first.
  return eigenvalues(k).imag() > 0.0 ? k + 1 : k - 1;
}

VectorXd evaluate_residual(const FullOrderModel& model, const VectorXd& w,
                           const ControlInput& u_c, double u_d) {
  if (w.size() != model.n) {
    throw DimensionError("evaluate_residual: state w has size " + std::to_string(w.size()) +
                         ", model.n = " + std::to_string(model.n));
  }
  if (!w.allFinite()) throw NumericalError("evaluate_residual: non-finite state w");
  if (!u_c.allFinite() || !std::isfinite(u_d)) {
    throw NumericalError("evaluate_residual: non-finite control or disturbance");
  }
  return model.residual(w, u_c, u_d);
}

TrimState solve_trim(const FullOrderModel& model, const VectorXd& guess,
                     const std::vector<int>& free_variables, const TrimOptions& opts) {
  if (free_variables.empty()) throw ConfigError("solve_trim: free_variables is empty");
  if (guess.size() != model.n) {
    throw DimensionError("solve_trim: guess has size " + std::to_string(guess.size()) +
                         ", model.n = " + std::to_string(model.n));
  }
  if (!guess.allFinite()) throw NumericalError("solve_trim: non-finite guess");
  for (int idx : free_variables) {
    if (idx < 0 || idx >= model.n) {
      throw DimensionError("solve_trim: free variable index " + std::to_string(idx) +
                           " out of range");
    }
  }

  const ControlInput u0 = ControlInput::Zero();
  const int nf = static_cast<int>(free_variables.size());

  auto restricted = [&](const VectorXd& w) {
    const VectorXd r = model.residual(w, u0, 0.0);
    VectorXd rf(nf);
    for (int i = 0; i < nf; ++i) rf(i) = r(free_variables[static_cast<size_t>(i)]);
    return rf;
  };

  VectorXd w = guess;
  VectorXd r = restricted(w);
  const double scale = std::max(1.0, r.norm());

  TrimState out;
  out.iterations = 0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double rel = r.norm() / scale;
    if (rel <= opts.tolerance) {
      out.w0 = w;
      out.residual_norm = rel;
      out.iterations = it;
      return out;
    }

    // Jacobian of the restricted residual by central differences.
    MatrixXd J(nf, nf);
    for (int j = 0; j < nf; ++j) {
      const int idx = free_variables[static_cast<size_t>(j)];
      const double h = std::max(1e-6, 1e-6 * std::abs(w(idx)));
      VectorXd wp = w, wm = w;
      wp(idx) += h;
      wm(idx) -= h;
      const VectorXd rp = restricted(wp);
      const VectorXd rm = restricted(wm);
      if (!rp.allFinite() || !rm.allFinite()) {
        throw NumericalError("solve_trim: non-finite residual while differencing variable " +
                             std::to_string(idx));
      }
      J.col(j) = (rp - rm) / (2.0 * h);
    }

    Eigen::FullPivLU<MatrixXd> lu(J);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) {
      throw NumericalError(
          "solve_trim: singular Newton matrix; consider regularizing the model or "
          "freeing a different variable set");
    }
    const VectorXd step = lu.solve(-r);

    // Backtracking line search on ||R||.
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      VectorXd w_try = w;
      for (int i = 0; i < nf; ++i) {
        w_try(free_variables[static_cast<size_t>(i)]) += alpha * step(i);
      }
      const VectorXd r_try = restricted(w_try);
      if (r_try.allFinite() && r_try.norm() < r.norm()) {
        w = w_try;
        r = r_try;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      throw ConvergenceError("solve_trim: line search stalled at residual " +
                                 std::to_string(r.norm() / scale),
                             r.norm() / scale);
    }
  }

  const double rel = r.norm() / scale;
  if (rel <= opts.tolerance) {
    out.w0 = w;
    out.residual_norm = rel;
    out.iterations = opts.max_iterations;
    return out;
  }
  throw ConvergenceError("solve_trim: no convergence after " +
                             std::to_string(opts.max_iterations) +
                             " iterations, residual " + std::to_string(rel),
                         rel);
}

namespace {

// Central difference of the residual in one scalar channel.
VectorXd diff_channel(const FullOrderModel& model, const VectorXd& w0,
                      const std::function<VectorXd(double)>& eval, double h,
                      const std::string& name) {
  (void)model;
  (void)w0;
  const VectorXd rp = eval(h);
  const VectorXd rm = eval(-h);
  if (!rp.allFinite() || !rm.allFinite()) {
    throw NumericalError("compute_jacobian: non-finite residual while differencing " + name);
  }
  return (rp - rm) / (2.0 * h);
}

}  // namespace

LinearizedSystem compute_jacobian(const FullOrderModel& model, const TrimState& trim) {
  const VectorXd& w0 = trim.w0;
  if (w0.size() != model.n) {
    throw DimensionError("compute_jacobian: trim state size mismatch");
  }
  const ControlInput u0 = ControlInput::Zero();

  LinearizedSystem sys;
  sys.A.resize(model.n, model.n);
  for (int i = 0; i < model.n; ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(w0(i)));
    VectorXd wp = w0, wm = w0;
    wp(i) += h;
    wm(i) -= h;
    const VectorXd rp = model.residual(wp, u0, 0.0);
    const VectorXd rm = model.residual(wm, u0, 0.0);
    if (!rp.allFinite() || !rm.allFinite()) {
      throw NumericalError("compute_jacobian: non-finite residual at perturbation index " +
                           std::to_string(i));
    }
    sys.A.col(i) = (rp - rm) / (2.0 * h);
  }

  const double hc = 1e-6;
  sys.B_c = diff_channel(model, w0,
                         [&](double d) {
                           return model.residual(w0, ControlInput(d, 0.0, 0.0), 0.0);
                         },
                         hc, "flap rotation");
  sys.B_c1 = diff_channel(model, w0,
                          [&](double d) {
                            return model.residual(w0, ControlInput(0.0, d, 0.0), 0.0);
                          },
                          hc, "flap rate");
  sys.B_c2 = diff_channel(model, w0,
                          [&](double d) {
                            return model.residual(w0, ControlInput(0.0, 0.0, d), 0.0);
                          },
                          hc, "flap acceleration");
  sys.B_g = diff_channel(model, w0,
                         [&](double d) { return model.residual(w0, u0, d); }, hc, "gust");

  if (model.output_map) {
    const VectorXd y0 = model.output_map(w0);
    const int ny = static_cast<int>(y0.size());
    sys.C.resize(ny, model.n);
    for (int i = 0; i < model.n; ++i) {
      const double h = std::max(1e-6, 1e-6 * std::abs(w0(i)));
      VectorXd wp = w0, wm = w0;
      wp(i) += h;
      wm(i) -= h;
      sys.C.col(i) = (model.output_map(wp) - model.output_map(wm)) / (2.0 * h);
    }
  } else {
    sys.C.resize(0, model.n);
  }
  return sys;
}

namespace {

// Iterative 2-norm balancing by powers of two (diagonal similarity).
// Returns D with Ab = D^-1 A D better conditioned for eigenvector extraction.
VectorXd balance_matrix(const MatrixXd& A, MatrixXd& Ab) {
  const int n = static_cast<int>(A.rows());
  VectorXd d = VectorXd::Ones(n);
  Ab = A;
  const double radix = 2.0;
  bool done = false;
  int sweeps = 0;
  while (!done && sweeps < 100) {
    done = true;
    ++sweeps;
    for (int i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(Ab(j, i));
        r += std::abs(Ab(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        d(i) *= f;
        Ab.row(i) /= f;
        Ab.col(i) *= f;
      }
    }
  }
  return d;
}

}  // namespace

EigenDecomposition eig_biorthonormal(const MatrixXd& A) {
  if (A.rows() != A.cols()) throw DimensionError("eig_biorthonormal: A must be square");
  const int n = static_cast<int>(A.rows());

  MatrixXd Ab;
  const VectorXd d = balance_matrix(A, Ab);

  Eigen::EigenSolver<MatrixXd> es(Ab, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eig_biorthonormal: eigen-decomposition failed to converge");
  }

  VectorXcd lam = es.eigenvalues();
  MatrixXcd phi = es.eigenvectors();
  // Undo the balancing: eigenvectors of A are D * (eigenvectors of Ab).
  for (int i = 0; i < n; ++i) phi.col(i) = d.asDiagonal() * phi.col(i);

  // Canonical ordering: ascending |lambda|, then real part, then |Im|, with
  // positive imaginary part first. Ties broken by original index.
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(lam(a)), mb = std::abs(lam(b));
    if (ma != mb) return ma < mb;
    if (lam(a).real() != lam(b).real()) return lam(a).real() < lam(b).real();
    const double ia = lam(a).imag(), ib = lam(b).imag();
    if (std::abs(ia) != std::abs(ib)) return std::abs(ia) < std::abs(ib);
    if (ia != ib) return ia > ib;  // positive imaginary first
    return a < b;
  });

  const double spectrum_scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double imag_tol = 1e-12 * spectrum_scale;

  // Normalize the phase so the largest component is real positive.
  auto phase_normalize = [](VectorXcd v) {
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const Complex pivot = v(imax);
    if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
    return v;
  };

  // Emit modes in sorted order, consuming conjugate partners together so pairs
  // are exactly conjugate and adjacent even in degenerate spectra.
  EigenDecomposition dec;
  dec.eigenvalues.resize(n);
  dec.right_vectors.resize(n, n);
  std::vector<char> used(static_cast<size_t>(n), 0);
  int out = 0;
  for (int s = 0; s < n; ++s) {
    const int i = order[static_cast<size_t>(s)];
    if (used[static_cast<size_t>(i)]) continue;
    used[static_cast<size_t>(i)] = 1;
    const Complex l = lam(i);
    if (std::abs(l.imag()) <= imag_tol) {
      VectorXcd v = phase_normalize(phi.col(i));
      VectorXd vr = v.real();
      const double nrm = vr.norm();
      if (nrm == 0.0) throw NumericalError("eig_biorthonormal: zero eigenvector");
      dec.eigenvalues(out) = Complex(l.real(), 0.0);
      dec.right_vectors.col(out) = (vr / nrm).cast<Complex>();
      ++out;
    } else {
      // Find the unused closest conjugate partner.
      int best = -1;
      double best_dist = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double dist = std::abs(lam(j) - std::conj(l));
        if (dist < best_dist) {
          best_dist = dist;
          best = j;
        }
      }
      if (best < 0 || best_dist > 1e-6 * spectrum_scale) {
        throw NumericalError("eig_biorthonormal: unpaired complex eigenvalue");
      }
      used[static_cast<size_t>(best)] = 1;
      VectorXcd v = phase_normalize(phi.col(l.imag() > 0.0 ? i : best));
      v /= v.norm();
      const Complex lp = l.imag() > 0.0 ? l : std::conj(l);
      dec.eigenvalues(out) = lp;
      dec.right_vectors.col(out) = v;
      dec.eigenvalues(out + 1) = std::conj(lp);
      dec.right_vectors.col(out + 1) = v.conjugate();
      out += 2;
    }
  }

  // Left vectors from Psi^H = Phi^{-1}; also gives the conditioning check.
  Eigen::JacobiSVD<MatrixXcd> svd(dec.right_vectors);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(n - 1);
  if (smin <= 0.0 || smax / smin > 1e12) {
    throw NumericalError(
        "eig_biorthonormal: eigenvector matrix condition exceeds 1e12 (matrix is "
        "defective or near-defective); consider a different modal set");
  }
  Eigen::PartialPivLU<MatrixXcd> lu(dec.right_vectors);
  const MatrixXcd phi_inv = lu.solve(MatrixXcd::Identity(n, n));
  dec.left_vectors = phi_inv.adjoint();

  return dec;
}

void check_eig_invariants(const EigenDecomposition& dec, const MatrixXd& A, double tol) {
  const int n = dec.size();
  const MatrixXcd gram = dec.left_vectors.adjoint() * dec.right_vectors;
  const double ortho = (gram - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (ortho >= tol) {
    throw NumericalError("eig invariants: ||Psi^H Phi - I||_max = " + std::to_string(ortho));
  }
  const double a_norm = A.norm();
  for (int k = 0; k < n; ++k) {
    const VectorXcd r =
        A.cast<Complex>() * dec.right_vectors.col(k) - dec.eigenvalues(k) * dec.right_vectors.col(k);
    const double res = r.norm() / dec.right_vectors.col(k).norm();
    if (res >= tol * a_norm) {
      throw NumericalError("eig invariants: eigen-residual " + std::to_string(res) +
                           " at mode " + std::to_string(k));
    }
    if (!dec.is_real_mode(k)) {
      const int p = dec.conjugate_partner(k);
      if (p < 0 || p >= n) {
        throw NumericalError("eig invariants: missing conjugate partner at mode " +
                             std::to_string(k));
      }
      if (std::abs(dec.eigenvalues(p) - std::conj(dec.eigenvalues(k))) >
          tol * std::max(1.0, std::abs(dec.eigenvalues(k)))) {
        throw NumericalError("eig invariants: conjugate pair mismatch at mode " +
                             std::to_string(k));
      }
    }
  }
}

}  // namespace gla
