#include "rigidflow/igso3.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "rigidflow/errors.hpp"

namespace rigidflow::igso3 {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesTolerance = 1e-12;
constexpr double kDegenerateDensity = 1e-300;
constexpr double kSupportWidths = 16.0;

}  // namespace

double angle_pdf_series(double theta, double epsilon, int l_max) {
  const double eps2 = epsilon * epsilon;
  const double half = 0.5 * theta;
  const double sin_half = std::sin(half);
  const bool at_zero = std::abs(sin_half) < 1e-12;
  double sum = 0.0;
  for (int l = 0; l <= l_max; ++l) {
    const double degree = 2.0 * l + 1.0;
    const double decay = std::exp(-static_cast<double>(l) * (l + 1.0) * eps2);
    const double ratio = at_zero ? degree : std::sin((l + 0.5) * theta) / sin_half;
    sum += degree * decay * ratio;
    // |ratio| <= 2l + 1, and degree^2 * decay is unimodal in l.
    if (degree * degree * decay < kSeriesTolerance) break;
  }
  return std::max(0.0, (1.0 - std::cos(theta)) / kPi * sum);
}

double angle_pdf_approx(double theta, double epsilon) {
  // The closed form is written in the heat-kernel time multiplying l(l+1) in
  // the series above, which is eps^2.
  const double t = epsilon * epsilon;
  const double bracket = theta - (theta - 2.0 * kPi) * std::exp(kPi * (theta - kPi) / t) -
                         (theta + 2.0 * kPi) * std::exp(-kPi * (theta + kPi) / t);
  // (1 - cos theta) / (2 sin(theta / 2)) == sin(theta / 2), so theta -> 0 is
  // finite without a special case.
  const double log_scale = 0.5 * std::log(kPi) - 1.5 * std::log(t) + 0.25 * t -
                           0.25 * theta * theta / t;
  return std::max(0.0, std::sin(0.5 * theta) / kPi * std::exp(log_scale) * bracket);
}

double uniform_limit_pdf(double theta) { return (1.0 - std::cos(theta)) / kPi; }

double grid_upper_bound(double epsilon) { return std::min(kPi, kSupportWidths * epsilon); }

AngleDensityTable build_table(const Params& params) {
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must be positive and finite");
  }
  if (params.grid_size < 256 || params.l_max < 1) {
    throw Error(ErrorKind::InvalidArgument, "grid_size must be >= 256 and l_max >= 1");
  }

  AngleDensityTable table;
  table.epsilon = params.epsilon;
  table.used_approximation = params.epsilon < params.approx_threshold;

  const auto n = static_cast<std::size_t>(params.grid_size);
  const double upper = grid_upper_bound(params.epsilon);
  const double step = upper / static_cast<double>(n - 1);
  table.thetas.resize(n);
  table.pdf.resize(n);
  table.cdf.resize(n);

  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = (i + 1 == n) ? upper : step * static_cast<double>(i);
    table.thetas[i] = theta;
    table.pdf[i] = table.used_approximation ? angle_pdf_approx(theta, params.epsilon)
                                            : angle_pdf_series(theta, params.epsilon, params.l_max);
    peak = std::max(peak, table.pdf[i]);
  }
  if (peak < kDegenerateDensity) {
    throw Error(ErrorKind::DegenerateDensity, "angle density vanishes on the whole grid");
  }

  table.cdf[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double width = table.thetas[i] - table.thetas[i - 1];
    table.cdf[i] = table.cdf[i - 1] + 0.5 * width * (table.pdf[i] + table.pdf[i - 1]);
  }
  const double mass = table.cdf[n - 1];
  table.raw_integral = mass;
  for (std::size_t i = 0; i < n; ++i) {
    table.pdf[i] /= mass;
    table.cdf[i] /= mass;
  }
  table.cdf[n - 1] = 1.0;
  return table;
}

const AngleDensityTable& cached_table(double epsilon) {
  static std::mutex mutex;
  static std::map<double, std::unique_ptr<const AngleDensityTable>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(epsilon);
  if (it == cache.end()) {
    Params params;
    params.epsilon = epsilon;
    it = cache.emplace(epsilon, std::make_unique<const AngleDensityTable>(build_table(params)))
             .first;
  }
  return *it->second;
}

double sample_angle(const AngleDensityTable& table, double u) {
  const auto& cdf = table.cdf;
  u = std::clamp(u, 0.0, 1.0);
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.begin()) return table.thetas.front();
  if (it == cdf.end()) return table.thetas.back();
  const auto i = static_cast<std::size_t>(it - cdf.begin());
  const double lo = cdf[i - 1];
  const double hi = cdf[i];
  const double frac = hi > lo ? (u - lo) / (hi - lo) : 0.0;
  return table.thetas[i - 1] + frac * (table.thetas[i] - table.thetas[i - 1]);
}

Vec3 sample_axis(Rng& rng) {
  while (true) {
    Vec3 v;
    v.x() = standard_normal(rng);
    v.y() = standard_normal(rng);
    v.z() = standard_normal(rng);
    const double norm = v.norm();
    if (norm >= 1e-8) return v / norm;
  }
}

Mat3 sample_rotation(const Mat3& mu, const AngleDensityTable& table, Rng& rng) {
  const Vec3 axis = sample_axis(rng);
  const double theta = sample_angle(table, uniform01(rng));
  return mu * exp_map(theta * axis);
}

}  // namespace rigidflow::igso3
