#include "gla/gla_plant.hpp"

#include <cmath>

namespace gla {

AugmentedPlant augment(const ReducedOrderModel& rom, const PerformanceSelection& outputs,
                       double K_c) {
  if (K_c <= 0.0) {
    throw ConfigError("augment: K_c must be positive (zero control weight makes the "
                      "synthesis problem singular)");
  }
  if (rom.b_c.size() == 0 || rom.b_c1.size() == 0 || rom.b_c2.size() == 0) {
    throw DimensionError("augment: ROM is missing control input columns");
  }
  const RealRealization real = rom.real_realization();
  const int mr = real.states;
  const int np = mr + 2;

  AugmentedPlant plant;
  plant.K_c = K_c;
  plant.rom_states = mr;
  plant.A_p = MatrixXd::Zero(np, np);
  plant.A_p.topLeftCorner(mr, mr) = real.A;
  plant.A_p.block(0, mr, mr, 1) = real.B.col(0);      // flap rotation
  plant.A_p.block(0, mr + 1, mr, 1) = real.B.col(1);  // flap rate
  plant.A_p(mr, mr + 1) = 1.0;                        // double integrator

  plant.B_w = VectorXd::Zero(np);
  plant.B_w.head(mr) = real.B.col(3);

  plant.B_u = VectorXd::Zero(np);
  plant.B_u.head(mr) = real.B.col(2);  // flap acceleration column
  plant.B_u(np - 1) = 1.0;

  auto output_row = [&](int idx) {
    if (idx < 0 || idx >= real.C.rows()) {
      throw DimensionError("augment: output index " + std::to_string(idx) +
                           " out of range for " + std::to_string(real.C.rows()) + " outputs");
    }
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(np);
    row.head(mr) = real.C.row(idx);
    return row;
  };

  if (outputs.performance_outputs.empty()) {
    throw ConfigError("augment: performance selection is empty");
  }
  plant.C_z.resize(static_cast<int>(outputs.performance_outputs.size()), np);
  for (size_t i = 0; i < outputs.performance_outputs.size(); ++i) {
    plant.C_z.row(static_cast<int>(i)) = output_row(outputs.performance_outputs[i]);
  }
  plant.C_y.resize(1, np);
  plant.C_y.row(0) = output_row(outputs.measurement_output);
  return plant;
}

GeneralizedPlant build_generalized_plant(const AugmentedPlant& plant, double eps_n) {
  if (plant.K_c <= 0.0) {
    throw ConfigError("build_generalized_plant: K_c must be positive (singular synthesis)");
  }
  if (eps_n <= 0.0) {
    throw ConfigError("build_generalized_plant: eps_n must be positive");
  }
  const int n = plant.states();
  const int nz = static_cast<int>(plant.C_z.rows());

  GeneralizedPlant gp;
  gp.A = plant.A_p;
  // Disturbances: physical gust plus the measurement-noise channel.
  gp.B1 = MatrixXd::Zero(n, 2);
  gp.B1.col(0) = plant.B_w;
  gp.B2 = plant.B_u;

  gp.C1 = MatrixXd::Zero(nz + 1, n);
  gp.C1.topRows(nz) = plant.C_z;
  gp.D11 = MatrixXd::Zero(nz + 1, 2);
  gp.D12 = MatrixXd::Zero(nz + 1, 1);
  gp.D12(nz, 0) = plant.K_c;

  gp.C2 = plant.C_y;
  // Noise scaling relative to the measurement row so eps_n is dimensionless.
  const double y_scale = std::max(plant.C_y.row(0).norm(), 1e-30);
  gp.D21 = MatrixXd::Zero(1, 2);
  gp.D21(0, 1) = eps_n * y_scale;
  gp.D22 = MatrixXd::Zero(1, 1);
  return gp;
}

}  // namespace gla
