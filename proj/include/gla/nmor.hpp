#pragma once

#include <string>
#include <vector>

#include "gla/statespace.hpp"

namespace gla {

enum class SelectionCriterion { frequency_band, gust_participation, manual };

SelectionCriterion selection_criterion_from_string(const std::string& name);
std::string to_string(SelectionCriterion c);

struct ModeSelection {
  std::vector<int> retained_indices;  // indices into the decomposition
  SelectionCriterion criterion = SelectionCriterion::manual;
  double band_min = 0.0;  // rad/s, frequency_band only
  double band_max = 0.0;

  int size() const { return static_cast<int>(retained_indices.size()); }
};

// Rotates the right/left vectors inside exactly-degenerate eigenvalue clusters
// (relative gap < 1e-10) by a unitary transform that concentrates the gust
// input coupling psi^H B_g into a single mode per cluster. The per-strip
// Kussner lag states produce such clusters; without concentration the basis
// inside each eigenspace is solver-arbitrary and gust participation is smeared
// across it. Preserves eigenvalues, biorthonormality, and conjugate pairing.
EigenDecomposition concentrate_gust_clusters(const EigenDecomposition& dec, const VectorXd& B_g);

// Ranks and retains m modes. gust_participation ranks by
// |psi_k^H B_g| * |C_meas phi_k| / |Re lambda_k| (measurement row of C);
// frequency_band retains modes with |Im lambda| inside [band_min, band_max]
// plus all real modes with |lambda| <= band_max. Conjugate pairs are always
// retained together; ties break by ascending |lambda| then index.
ModeSelection select_modes(const EigenDecomposition& dec, const LinearizedSystem& linsys,
                           SelectionCriterion criterion, int m, double band_min = 0.0,
                           double band_max = 0.0);

ModeSelection manual_selection(const EigenDecomposition& dec, std::vector<int> indices);

// Real block form of the ROM: 1x1 blocks for real modes, 2x2 blocks
// [Re l, Im l; -Im l, Re l] for conjugate pairs. B columns are ordered
// [b_c, b_c1, b_c2, b_g]; C rows are the projected outputs.
struct RealRealization {
  MatrixXd A;
  MatrixXd B;
  MatrixXd C;
  int states = 0;
};

// Reduced model per the modal projection: z' = Lambda z + D(z, z) + inputs.
struct ReducedOrderModel {
  VectorXcd lambda;
  VectorXcd b_c, b_c1, b_c2, b_g;  // psi^H B_*
  MatrixXcd phi_out;               // C Phi, one row per model output
  std::vector<MatrixXcd> D;        // D[k](i, j), symmetric in (i, j)
  std::vector<int> source_indices;

  int modes() const { return static_cast<int>(lambda.size()); }
  bool has_bilinear() const { return !D.empty(); }

  // Chooses the input column by channel: 0 -> b_c, 1 -> b_c1, 2 -> b_c2, 3 -> b_g.
  const VectorXcd& input_column(int channel) const;

  RealRealization real_realization() const;

  // Transfer value of one input channel to all outputs at s = i omega.
  VectorXcd transfer(double omega, int channel) const;
};

// Linear part only; D is left empty.
ReducedOrderModel project(const LinearizedSystem& linsys, const EigenDecomposition& dec,
                          const ModeSelection& sel);

// D_kij = 1/2 psi_k^H H(phi_i, phi_j) with the Hessian action evaluated by
// second-order central differences of the residual about the trim point,
// h = 1e-4 scaled by the state norm, symmetrized in (i, j).
std::vector<MatrixXcd> identify_bilinear(const FullOrderModel& model, const TrimState& trim,
                                         const EigenDecomposition& dec, const ModeSelection& sel);

// Full Eq.-style right-hand side including the bilinear terms.
VectorXcd rom_rhs(const ReducedOrderModel& rom, const VectorXcd& z, const ControlInput& u_c,
                  double u_d);

// Text round-trip; D entries below 1e-12 magnitude are dropped on save.
void save_rom(const ReducedOrderModel& rom, const std::string& path);
ReducedOrderModel load_rom(const std::string& path);

}  // namespace gla
