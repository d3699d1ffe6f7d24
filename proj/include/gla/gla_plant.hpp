#pragma once

#include "gla/nmor.hpp"
#include "gla/statespace.hpp"

namespace gla {

struct ActuatorState {
  double delta = 0.0;      // flap deflection [rad]
  double delta_dot = 0.0;  // flap rate [rad/s]
};

// Which projected output rows feed the plant. Row indices refer to the model
// output map (0 tip displacement, 1 root bending moment, 2 tip slope).
struct PerformanceSelection {
  std::vector<int> performance_outputs = {0};
  int measurement_output = 0;
};

// ROM augmented with the second-order flap actuator:
//   x = [z_real, delta, delta_dot],  u = delta_ddot.
struct AugmentedPlant {
  MatrixXd A_p;
  VectorXd B_w;  // gust column
  VectorXd B_u;  // control column
  MatrixXd C_z;  // performance rows
  MatrixXd C_y;  // measurement rows
  double K_c = 1.0;
  int rom_states = 0;

  int states() const { return static_cast<int>(A_p.rows()); }
};

// Two-port plant: inputs [w_g, measurement noise | u], outputs [z_perf | y].
struct GeneralizedPlant {
  MatrixXd A;
  MatrixXd B1, B2;
  MatrixXd C1, D11, D12;
  MatrixXd C2, D21, D22;

  int states() const { return static_cast<int>(A.rows()); }
};

// Assembles A_p, B_w, B_u from the real ROM realization: the ROM block feeds
// from the actuator states through the flap-rotation and flap-rate columns,
// the acceleration column rides on the control input, and the bottom-right
// 2x2 block is the double integrator.
AugmentedPlant augment(const ReducedOrderModel& rom, const PerformanceSelection& outputs,
                       double K_c = 1.0);

// Builds the two-port plant with performance output [C_z x; K_c u] and a
// measurement-noise regularization eps_n on D21 (relative to the measurement
// row scale) so the synthesis rank conditions hold.
GeneralizedPlant build_generalized_plant(const AugmentedPlant& plant, double eps_n = 1e-4);

}  // namespace gla
