#include "gla/nmor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace gla {

SelectionCriterion selection_criterion_from_string(const std::string& name) {
  if (name == "frequency_band") return SelectionCriterion::frequency_band;
  if (name == "gust_participation") return SelectionCriterion::gust_participation;
  if (name == "manual") return SelectionCriterion::manual;
  throw ConfigError("unknown mode-selection criterion '" + name + "'");
}

std::string to_string(SelectionCriterion c) {
  switch (c) {
    case SelectionCriterion::frequency_band: return "frequency_band";
    case SelectionCriterion::gust_participation: return "gust_participation";
    case SelectionCriterion::manual: return "manual";
  }
  return "?";
}

EigenDecomposition concentrate_gust_clusters(const EigenDecomposition& dec, const VectorXd& B_g) {
  const int n = dec.size();
  if (B_g.size() != n) throw DimensionError("concentrate_gust_clusters: B_g size mismatch");
  EigenDecomposition out = dec;

  const double scale = std::max(1.0, dec.eigenvalues.cwiseAbs().maxCoeff());
  const double cluster_tol = 1e-10 * scale;

  std::vector<char> visited(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    if (visited[static_cast<size_t>(i)]) continue;
    std::vector<int> cluster{i};
    visited[static_cast<size_t>(i)] = 1;
    for (int j = i + 1; j < n; ++j) {
      if (visited[static_cast<size_t>(j)]) continue;
      if (std::abs(dec.eigenvalues(j) - dec.eigenvalues(i)) < cluster_tol) {
        cluster.push_back(j);
        visited[static_cast<size_t>(j)] = 1;
      }
    }
    const int d = static_cast<int>(cluster.size());
    if (d < 2) continue;

    // Coupling of each cluster member to the gust input.
    VectorXcd v(d);
    for (int k = 0; k < d; ++k) {
      v(k) = out.left_vectors.col(cluster[static_cast<size_t>(k)]).dot(B_g.cast<Complex>());
    }
    const double vn = v.norm();
    if (vn < 1e-14 * std::max(1.0, B_g.norm())) continue;

    // Unitary G with first column v/|v|: after Phi_E <- Phi_E G and
    // Psi_E <- Psi_E G, only the first rotated mode couples to B_g.
    MatrixXcd G = MatrixXcd::Identity(d, d);
    G.col(0) = v / vn;
    // Gram-Schmidt completion against the first column.
    for (int c = 1; c < d; ++c) {
      VectorXcd col = MatrixXcd::Identity(d, d).col(c);
      for (int p = 0; p < c; ++p) col -= (G.col(p).adjoint() * col)(0) * G.col(p);
      const double cn = col.norm();
      if (cn < 1e-12) {
        // Degenerate pivot; restart from a shifted unit vector.
        col = VectorXcd::Zero(d);
        col((c + 1) % d) = 1.0;
        for (int p = 0; p < c; ++p) col -= (G.col(p).adjoint() * col)(0) * G.col(p);
      }
      G.col(c) = col / col.norm();
    }

    MatrixXcd phi_cluster(n, d), psi_cluster(n, d);
    for (int k = 0; k < d; ++k) {
      phi_cluster.col(k) = out.right_vectors.col(cluster[static_cast<size_t>(k)]);
      psi_cluster.col(k) = out.left_vectors.col(cluster[static_cast<size_t>(k)]);
    }
    phi_cluster = phi_cluster * G;
    psi_cluster = psi_cluster * G;
    // Restore unit right vectors, compensating in the left set.
    for (int k = 0; k < d; ++k) {
      const double nrm = phi_cluster.col(k).norm();
      phi_cluster.col(k) /= nrm;
      psi_cluster.col(k) *= nrm;
      const int idx = cluster[static_cast<size_t>(k)];
      out.right_vectors.col(idx) = phi_cluster.col(k);
      out.left_vectors.col(idx) = psi_cluster.col(k);
      // Real clusters keep real vectors: the rotation can introduce a global
      // phase; strip it when the eigenvalue is real.
      if (out.is_real_mode(idx)) {
        VectorXcd rv = out.right_vectors.col(idx);
        int imax = 0;
        rv.cwiseAbs().maxCoeff(&imax);
        const Complex pivot = rv(imax);
        if (std::abs(pivot) > 0.0) {
          const Complex rot = std::conj(pivot) / std::abs(pivot);
          out.right_vectors.col(idx) = rv * rot;
          out.left_vectors.col(idx) = out.left_vectors.col(idx) * rot;
        }
      }
    }
  }
  return out;
}

namespace {

// Enforces conjugate closure and deterministic ordering on a retained set.
std::vector<int> close_and_sort(const EigenDecomposition& dec, std::vector<int> indices) {
  std::vector<char> keep(static_cast<size_t>(dec.size()), 0);
  for (int idx : indices) {
    if (idx < 0 || idx >= dec.size()) {
      throw DimensionError("mode selection: index " + std::to_string(idx) + " out of range");
    }
    keep[static_cast<size_t>(idx)] = 1;
    const int p = dec.conjugate_partner(idx);
    if (p >= 0) keep[static_cast<size_t>(p)] = 1;
  }
  std::vector<int> out;
  for (int i = 0; i < dec.size(); ++i) {
    if (keep[static_cast<size_t>(i)]) out.push_back(i);
  }
  // Decomposition order already sorts by |lambda| with pairs adjacent.
  return out;
}

}  // namespace

ModeSelection select_modes(const EigenDecomposition& dec, const LinearizedSystem& linsys,
                           SelectionCriterion criterion, int m, double band_min,
                           double band_max) {
  if (m < 1) throw ConfigError("select_modes: retained count m must be >= 1");
  const int n = dec.size();
  if (linsys.B_g.size() != n) throw DimensionError("select_modes: B_g size mismatch");

  ModeSelection sel;
  sel.criterion = criterion;
  sel.band_min = band_min;
  sel.band_max = band_max;

  if (criterion == SelectionCriterion::manual) {
    throw ConfigError("select_modes: use manual_selection for explicit index lists");
  }

  if (criterion == SelectionCriterion::frequency_band) {
    std::vector<int> chosen;
    for (int k = 0; k < n; ++k) {
      const double im = std::abs(dec.eigenvalues(k).imag());
      const bool real_lag = dec.is_real_mode(k) && std::abs(dec.eigenvalues(k)) <= band_max;
      if ((im >= band_min && im <= band_max && im > 0.0) || real_lag) chosen.push_back(k);
    }
    sel.retained_indices = close_and_sort(dec, chosen);
    if (sel.retained_indices.empty()) throw ConfigError("select_modes: empty frequency band");
    return sel;
  }

  // Gust participation: |psi^H B_g| |C_meas phi| / |Re lambda| with conjugate
  // closure. Pairs are ranked by their positive-imaginary member.
  const Eigen::RowVectorXd c_meas =
      linsys.C.rows() > 0 ? linsys.C.row(0) : Eigen::RowVectorXd::Ones(n);
  std::vector<double> score(static_cast<size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    const Complex coupling = dec.left_vectors.col(k).dot(linsys.B_g.cast<Complex>());
    const Complex observability = (c_meas.cast<Complex>() * dec.right_vectors.col(k))(0);
    const double decay = std::max(std::abs(dec.eigenvalues(k).real()), 1e-12);
    score[static_cast<size_t>(k)] = std::abs(coupling) * std::abs(observability) / decay;
  }

  // Candidates: real modes and the first member of each pair.
  std::vector<int> candidates;
  for (int k = 0; k < n; ++k) {
    if (dec.is_real_mode(k) || dec.eigenvalues(k).imag() > 0.0) candidates.push_back(k);
  }
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    if (score[static_cast<size_t>(a)] != score[static_cast<size_t>(b)]) {
      return score[static_cast<size_t>(a)] > score[static_cast<size_t>(b)];
    }
    const double ma = std::abs(dec.eigenvalues(a)), mb = std::abs(dec.eigenvalues(b));
    if (ma != mb) return ma < mb;
    return a < b;
  });

  std::vector<int> chosen;
  int count = 0;
  for (int k : candidates) {
    const int width = dec.is_real_mode(k) ? 1 : 2;
    if (count + width > m) continue;
    chosen.push_back(k);
    count += width;
    if (count == m) break;
  }
  if (chosen.empty()) throw ConfigError("select_modes: empty selection");
  sel.retained_indices = close_and_sort(dec, chosen);
  return sel;
}

ModeSelection manual_selection(const EigenDecomposition& dec, std::vector<int> indices) {
  if (indices.empty()) throw ConfigError("manual_selection: empty index list");
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  ModeSelection sel;
  sel.criterion = SelectionCriterion::manual;
  sel.retained_indices = close_and_sort(dec, indices);
  return sel;
}

const VectorXcd& ReducedOrderModel::input_column(int channel) const {
  switch (channel) {
    case 0: return b_c;
    case 1: return b_c1;
    case 2: return b_c2;
    case 3: return b_g;
    default: throw DimensionError("ReducedOrderModel: input channel out of range");
  }
}

RealRealization ReducedOrderModel::real_realization() const {
  const int m = modes();
  RealRealization real;
  real.A = MatrixXd::Zero(m, m);
  real.B = MatrixXd::Zero(m, 4);
  real.C = MatrixXd::Zero(phi_out.rows(), m);
  int r = 0;
  for (int k = 0; k < m;) {
    const Complex l = lambda(k);
    if (l.imag() == 0.0) {
      real.A(r, r) = l.real();
      for (int ch = 0; ch < 4; ++ch) real.B(r, ch) = input_column(ch)(k).real();
      for (int o = 0; o < phi_out.rows(); ++o) real.C(o, r) = phi_out(o, k).real();
      r += 1;
      k += 1;
    } else {
      if (k + 1 >= m || lambda(k + 1) != std::conj(l)) {
        throw NumericalError("real_realization: conjugate pair not adjacent in the ROM");
      }
      // States p = 2 Re z, q = -2 Im z for the pair.
      real.A(r, r) = l.real();
      real.A(r, r + 1) = l.imag();
      real.A(r + 1, r) = -l.imag();
      real.A(r + 1, r + 1) = l.real();
      for (int ch = 0; ch < 4; ++ch) {
        const Complex beta = input_column(ch)(k);
        real.B(r, ch) = 2.0 * beta.real();
        real.B(r + 1, ch) = -2.0 * beta.imag();
      }
      for (int o = 0; o < phi_out.rows(); ++o) {
        real.C(o, r) = phi_out(o, k).real();
        real.C(o, r + 1) = phi_out(o, k).imag();
      }
      r += 2;
      k += 2;
    }
  }
  real.states = r;
  return real;
}

VectorXcd ReducedOrderModel::transfer(double omega, int channel) const {
  const Complex s(0.0, omega);
  const VectorXcd& col = input_column(channel);
  VectorXcd resolvent = ((s * VectorXcd::Ones(modes())) - lambda).cwiseInverse();
  return phi_out * resolvent.cwiseProduct(col);
}

ReducedOrderModel project(const LinearizedSystem& linsys, const EigenDecomposition& dec,
                          const ModeSelection& sel) {
  const int m = sel.size();
  if (m < 1) throw ConfigError("project: empty selection");
  ReducedOrderModel rom;
  rom.lambda.resize(m);
  rom.b_c.resize(m);
  rom.b_c1.resize(m);
  rom.b_c2.resize(m);
  rom.b_g.resize(m);
  rom.phi_out.resize(linsys.C.rows(), m);
  rom.source_indices = sel.retained_indices;
  for (int i = 0; i < m; ++i) {
    const int k = sel.retained_indices[static_cast<size_t>(i)];
    const auto psi = dec.left_vectors.col(k);
    rom.lambda(i) = dec.eigenvalues(k);
    rom.b_c(i) = psi.dot(linsys.B_c.cast<Complex>());
    rom.b_c1(i) = psi.dot(linsys.B_c1.cast<Complex>());
    rom.b_c2(i) = psi.dot(linsys.B_c2.cast<Complex>());
    rom.b_g(i) = psi.dot(linsys.B_g.cast<Complex>());
    rom.phi_out.col(i) = linsys.C.cast<Complex>() * dec.right_vectors.col(k);
  }
  return rom;
}

std::vector<MatrixXcd> identify_bilinear(const FullOrderModel& model, const TrimState& trim,
                                         const EigenDecomposition& dec, const ModeSelection& sel) {
  const int m = sel.size();
  const VectorXd& w0 = trim.w0;
  const ControlInput u0 = ControlInput::Zero();
  const double h = 1e-4 * std::max(1.0, w0.norm());

  auto residual_at = [&](const VectorXd& w) { return model.residual(w, u0, 0.0); };

  // Real Hessian action H(a, c) by the polarization formula.
  auto hessian_action = [&](const VectorXd& a, const VectorXd& c) {
    const VectorXd rp = residual_at(w0 + h * (a + c));
    const VectorXd rm = residual_at(w0 - h * (a + c));
    const VectorXd rp2 = residual_at(w0 + h * (a - c));
    const VectorXd rm2 = residual_at(w0 - h * (a - c));
    return ((rp + rm) - (rp2 + rm2)) / (4.0 * h * h);
  };

  std::vector<MatrixXcd> D(static_cast<size_t>(m), MatrixXcd::Zero(m, m));
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const VectorXcd phi_i = dec.right_vectors.col(sel.retained_indices[static_cast<size_t>(i)]);
      const VectorXcd phi_j = dec.right_vectors.col(sel.retained_indices[static_cast<size_t>(j)]);
      // Complex bilinear extension of the real Hessian action.
      const VectorXd ar = phi_i.real(), ai = phi_i.imag();
      const VectorXd cr = phi_j.real(), ci = phi_j.imag();
      const VectorXd h_rr = hessian_action(ar, cr);
      const VectorXd h_ii = hessian_action(ai, ci);
      const VectorXd h_ri = hessian_action(ar, ci);
      const VectorXd h_ir = hessian_action(ai, cr);
      VectorXcd hij(model.n);
      hij.real() = h_rr - h_ii;
      hij.imag() = h_ri + h_ir;
      if (!hij.allFinite()) {
        throw NumericalError("identify_bilinear: non-finite difference at pair (" +
                             std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      for (int k = 0; k < m; ++k) {
        const auto psi = dec.left_vectors.col(sel.retained_indices[static_cast<size_t>(k)]);
        const Complex dkij = 0.5 * (psi.adjoint() * hij)(0);
        D[static_cast<size_t>(k)](i, j) = dkij;
        D[static_cast<size_t>(k)](j, i) = dkij;
      }
    }
  }
  return D;
}

VectorXcd rom_rhs(const ReducedOrderModel& rom, const VectorXcd& z, const ControlInput& u_c,
                  double u_d) {
  if (z.size() != rom.modes()) throw DimensionError("rom_rhs: state size mismatch");
  VectorXcd dz = rom.lambda.cwiseProduct(z);
  dz += rom.b_c * u_c(0) + rom.b_c1 * u_c(1) + rom.b_c2 * u_c(2) + rom.b_g * u_d;
  if (rom.has_bilinear()) {
    for (int k = 0; k < rom.modes(); ++k) {
      dz(k) += (z.transpose() * rom.D[static_cast<size_t>(k)] * z)(0);
    }
  }
  return dz;
}

namespace {

void write_complex_vector(std::ostream& os, const std::string& name, const VectorXcd& v) {
  os << name << " " << v.size() << "\n";
  for (int i = 0; i < v.size(); ++i) {
    os << std::setprecision(17) << v(i).real() << " " << v(i).imag() << "\n";
  }
}

VectorXcd read_complex_vector(std::istream& is, const std::string& expect) {
  std::string name;
  int size = 0;
  if (!(is >> name >> size) || name != expect) {
    throw ConfigError("rom file: expected section '" + expect + "'");
  }
  VectorXcd v(size);
  for (int i = 0; i < size; ++i) {
    double re = 0.0, im = 0.0;
    if (!(is >> re >> im)) throw ConfigError("rom file: truncated section '" + expect + "'");
    v(i) = Complex(re, im);
  }
  return v;
}

}  // namespace

void save_rom(const ReducedOrderModel& rom, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("save_rom: cannot open '" + path + "'");
  os << "glarom 1\n";
  os << "modes " << rom.modes() << " outputs " << rom.phi_out.rows() << "\n";
  write_complex_vector(os, "lambda", rom.lambda);
  write_complex_vector(os, "b_c", rom.b_c);
  write_complex_vector(os, "b_c1", rom.b_c1);
  write_complex_vector(os, "b_c2", rom.b_c2);
  write_complex_vector(os, "b_g", rom.b_g);
  os << "phi_out\n";
  for (int o = 0; o < rom.phi_out.rows(); ++o) {
    for (int k = 0; k < rom.modes(); ++k) {
      os << std::setprecision(17) << rom.phi_out(o, k).real() << " " << rom.phi_out(o, k).imag()
         << (k + 1 == rom.modes() ? "\n" : " ");
    }
  }
  // Sparse D entries above the magnitude floor.
  std::ostringstream entries;
  int count = 0;
  if (rom.has_bilinear()) {
    for (int k = 0; k < rom.modes(); ++k) {
      for (int i = 0; i < rom.modes(); ++i) {
        for (int j = 0; j < rom.modes(); ++j) {
          const Complex d = rom.D[static_cast<size_t>(k)](i, j);
          if (std::abs(d) > 1e-12) {
            entries << k << " " << i << " " << j << " " << std::setprecision(17) << d.real()
                    << " " << d.imag() << "\n";
            ++count;
          }
        }
      }
    }
  }
  os << "bilinear " << (rom.has_bilinear() ? 1 : 0) << " entries " << count << "\n";
  os << entries.str();
  if (!os) throw ConfigError("save_rom: write failed for '" + path + "'");
}

ReducedOrderModel load_rom(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("load_rom: cannot open '" + path + "'");
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "glarom" || version != 1) {
    throw ConfigError("load_rom: '" + path + "' is not a glarom v1 file");
  }
  std::string tok;
  int m = 0, outputs = 0;
  if (!(is >> tok >> m) || tok != "modes") throw ConfigError("load_rom: bad header");
  if (!(is >> tok >> outputs) || tok != "outputs") throw ConfigError("load_rom: bad header");
  ReducedOrderModel rom;
  rom.lambda = read_complex_vector(is, "lambda");
  rom.b_c = read_complex_vector(is, "b_c");
  rom.b_c1 = read_complex_vector(is, "b_c1");
  rom.b_c2 = read_complex_vector(is, "b_c2");
  rom.b_g = read_complex_vector(is, "b_g");
  if (rom.lambda.size() != m) throw ConfigError("load_rom: inconsistent mode count");
  if (!(is >> tok) || tok != "phi_out") throw ConfigError("load_rom: missing phi_out");
  rom.phi_out.resize(outputs, m);
  for (int o = 0; o < outputs; ++o) {
    for (int k = 0; k < m; ++k) {
      double re = 0.0, im = 0.0;
      if (!(is >> re >> im)) throw ConfigError("load_rom: truncated phi_out");
      rom.phi_out(o, k) = Complex(re, im);
    }
  }
  int has_bilinear = 0, entries = 0;
  if (!(is >> tok >> has_bilinear) || tok != "bilinear") {
    throw ConfigError("load_rom: missing bilinear header");
  }
  if (!(is >> tok >> entries) || tok != "entries") {
    throw ConfigError("load_rom: missing entries header");
  }
  if (has_bilinear) {
    rom.D.assign(static_cast<size_t>(m), MatrixXcd::Zero(m, m));
    for (int e = 0; e < entries; ++e) {
      int k = 0, i = 0, j = 0;
      double re = 0.0, im = 0.0;
      if (!(is >> k >> i >> j >> re >> im)) throw ConfigError("load_rom: truncated D entries");
      rom.D[static_cast<size_t>(k)](i, j) = Complex(re, im);
    }
  }
  return rom;
}

}  // namespace gla
