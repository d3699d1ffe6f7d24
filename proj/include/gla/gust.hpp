#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "gla/statespace.hpp"

namespace gla {

struct DiscreteGust {
  double w0 = 0.0;          // peak gust velocity [m/s]
  double H_g = 0.0;         // gust gradient distance [m]
  double start_time = 0.0;  // [s]
  double u_inf = 1.0;       // [m/s]

  double duration() const { return 2.0 * H_g / u_inf; }
  void validate() const;
};

// 1-minus-cosine profile: w0/2 (1 - cos(pi U (t - t0) / H_g)) inside the
// window [t0, t0 + 2 H_g / U], zero outside.
double discrete_gust(const DiscreteGust& gust, double t);

struct TurbulenceConfig {
  double sigma_w = 1.0;      // RMS intensity [m/s]
  double L_w = 750.0;        // scale length [m]
  double u_inf = 59.0;       // [m/s]
  std::uint64_t seed = 1;
  double duration = 60.0;    // [s]
  double sample_rate = 20.0; // [Hz], must resolve the spectral knee

  void validate() const;
};

// Rational shaping-filter coefficients for the Von Karman vertical spectrum,
// in powers of tau s with tau = L_w / U. Literature-standard third-order fit;
// validated through the PSD acceptance property, not asserted exact.
struct VonKarmanFilterCoefficients {
  double n1 = 2.7478;
  double n2 = 0.3398;
  double d1 = 2.9958;
  double d2 = 1.9754;
  double d3 = 0.1539;
};

struct GustSeries {
  VectorXd time;
  VectorXd velocity;

  // Linear interpolation inside the grid, zero outside.
  double value(double t) const;
  double end_time() const { return time.size() > 0 ? time(time.size() - 1) : 0.0; }
};

// Seeded Gaussian noise through the shaping filter, advanced with a Van Loan
// exact discretization and started from the stationary distribution. The
// output row is scaled so the stationary RMS equals sigma_w exactly.
GustSeries vonkarman_realization(const TurbulenceConfig& cfg,
                                 const VonKarmanFilterCoefficients& coeffs = {});

// Analytic Von Karman vertical-velocity spectrum, one-sided in omega [rad/s]:
// integral over [0, inf) equals sigma_w^2.
double vonkarman_psd(double omega, double sigma_w, double L_w, double u_inf);

// Poles of the shaping filter (for the stability property test).
VectorXcd vonkarman_filter_poles(const TurbulenceConfig& cfg,
                                 const VonKarmanFilterCoefficients& coeffs = {});

// Disturbance input for the simulation harness.
class GustSignal {
 public:
  static GustSignal zero();
  static GustSignal discrete(const DiscreteGust& gust);
  static GustSignal series(GustSeries data);

  double operator()(double t) const { return eval_(t); }
  // Largest time the signal is defined for (infinity for analytic signals).
  double covered_until() const { return covered_until_; }

 private:
  std::function<double(double)> eval_;
  double covered_until_ = std::numeric_limits<double>::infinity();
};

void save_series_csv(const GustSeries& series, const std::string& path);
GustSeries load_series_csv(const std::string& path);

}  // namespace gla
