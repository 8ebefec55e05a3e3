#pragma once

// Isotropic Gaussian on SO(3), IG(mu, eps^2).
//
// A sample is mu * exp(theta * n) with n uniform on S^2 and theta drawn from
// the angle marginal
//
//   p(theta) = (1 - cos theta) / pi * sum_l (2l + 1) exp(-l(l+1) eps^2)
//              * sin((l + 1/2) theta) / sin(theta / 2),
//
// which is tabulated on a uniform grid and inverted by linear interpolation.

#include <vector>

#include "rigidflow/rng.hpp"
#include "rigidflow/so3.hpp"

namespace rigidflow::igso3 {

struct Params {
  double epsilon = 0.5;
  int l_max = 2000;
  int grid_size = 8192;
  double approx_threshold = 0.1;
};

struct AngleDensityTable {
  double epsilon = 0.0;
  std::vector<double> thetas;
  std::vector<double> pdf;
  std::vector<double> cdf;
  // Trapezoidal mass of the raw density before renormalization.
  double raw_integral = 0.0;
  bool used_approximation = false;
};

// Series truncated at l_max (or earlier, once every remaining term is below
// 1e-12). Negative partial sums are clamped to zero.
double angle_pdf_series(double theta, double epsilon, int l_max = 2000);

// Closed-form small-concentration approximation of the same density.
double angle_pdf_approx(double theta, double epsilon);

// (1 - cos theta) / pi, the angle marginal of the uniform distribution.
double uniform_limit_pdf(double theta);

// Upper end of the tabulation grid: pi, or a shorter support for very
// concentrated densities whose mass would otherwise fall inside one cell.
double grid_upper_bound(double epsilon);

AngleDensityTable build_table(const Params& params);

// Shared immutable table for the default parameters at this epsilon.
const AngleDensityTable& cached_table(double epsilon);

// Inverse CDF at u in [0, 1].
double sample_angle(const AngleDensityTable& table, double u);

Vec3 sample_axis(Rng& rng);

Mat3 sample_rotation(const Mat3& mu, const AngleDensityTable& table, Rng& rng);

}  // namespace rigidflow::igso3
