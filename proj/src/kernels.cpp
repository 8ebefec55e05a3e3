#include "rigidflow/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <exception>
#include <string>

#include <omp.h>

#include "rigidflow/errors.hpp"
#include "rigidflow/rng.hpp"
#include "rigidflow/views.hpp"

namespace rigidflow {

namespace {

struct SerialLoop {
  template <class F>
  void operator()(std::size_t n, F&& body) const {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
};

struct ParallelLoop {
  template <class F>
  void operator()(std::size_t n, F&& body) const {
    std::exception_ptr error;
    std::size_t error_index = n;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(rigidflow_kernel_error)
        {
          if (static_cast<std::size_t>(i) < error_index) {
            error_index = static_cast<std::size_t>(i);
            error = std::current_exception();
          }
        }
      }
    }
    if (error) std::rethrow_exception(error);
  }
};

template <class Loop>
std::vector<RigidTransform> build_frames_impl(std::span<const Residue> residues) {
  std::vector<RigidTransform> out(residues.size());
  Loop{}(residues.size(), [&](std::size_t i) { out[i] = frame_from_residue(residues[i], i); });
  return out;
}

template <class Loop>
std::vector<UnitQuaternion> to_quaternions_impl(std::span<const RigidTransform> frames) {
  std::vector<UnitQuaternion> out(frames.size());
  Loop{}(frames.size(), [&](std::size_t i) { out[i] = quat_from_matrix(frames[i].r); });
  return out;
}

template <class Loop>
void perturb_frames_impl(std::span<RigidTransform> frames, double sigma,
                         const igso3::AngleDensityTable& table, std::uint64_t seed) {
  Loop{}(frames.size(), [&](std::size_t i) {
    Rng rng = substream(seed, i);
    frames[i].t = perturb_translation(frames[i].t, sigma, rng);
    frames[i].r = perturb_rotation(frames[i].r, table, rng);
  });
}

template <class Loop>
void interpolate_impl(const PairArrays& pair, double tau, std::span<Vec3> t,
                      std::span<UnitQuaternion> q) {
  Loop{}(pair.size(), [&](std::size_t i) {
    t[i] = lerp(pair.t0[i], pair.t1[i], tau);
    try {
      q[i] = slerp(pair.q0[i], pair.q1[i], tau);
    } catch (const Error& e) {
      throw Error(e.kind(), "residue " + std::to_string(i), i);
    }
  });
}

template <class Loop>
void velocities_impl(const PairArrays& pair, double tau, std::span<Vec3> u_trans,
                     std::span<Vec4> u_rot) {
  Loop{}(pair.size(), [&](std::size_t i) {
    u_trans[i] = pair.t1[i] - pair.t0[i];
    try {
      u_rot[i] = slerp_derivative(pair.q0[i], pair.q1[i], tau);
    } catch (const Error& e) {
      throw Error(e.kind(), "residue " + std::to_string(i), i);
    }
  });
}

template <class Loop>
void squared_errors_impl(std::span<const Vec3> pred_t, std::span<const Vec4> pred_r,
                         std::span<const Vec3> target_t, std::span<const Vec4> target_r,
                         std::span<double> err_t, std::span<double> err_r) {
  Loop{}(target_t.size(), [&](std::size_t i) {
    err_t[i] = (pred_t[i] - target_t[i]).squaredNorm();
    err_r[i] = (pred_r[i] - target_r[i]).squaredNorm();
  });
}

template <class Loop>
std::vector<AngleAxisSample> sample_igso3_impl(const igso3::AngleDensityTable& table,
                                               std::size_t n, std::uint64_t seed) {
  std::vector<AngleAxisSample> out(n);
  Loop{}(n, [&](std::size_t i) {
    Rng rng = substream(seed, i);
    out[i].axis = igso3::sample_axis(rng);
    out[i].angle = igso3::sample_angle(table, uniform01(rng));
  });
  return out;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void set_num_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int num_threads() { return omp_get_max_threads(); }

#define RIGIDFLOW_DEFINE_KERNELS(Loop)                                                         \
  std::vector<RigidTransform> build_frames(std::span<const Residue> residues) {                \
    return build_frames_impl<Loop>(residues);                                                  \
  }                                                                                            \
  std::vector<UnitQuaternion> to_quaternions(std::span<const RigidTransform> frames) {         \
    return to_quaternions_impl<Loop>(frames);                                                  \
  }                                                                                            \
  void perturb_frames(std::span<RigidTransform> frames, double sigma,                          \
                      const igso3::AngleDensityTable& table, std::uint64_t seed) {             \
    perturb_frames_impl<Loop>(frames, sigma, table, seed);                                     \
  }                                                                                            \
  void interpolate(const PairArrays& pair, double tau, std::span<Vec3> t,                      \
                   std::span<UnitQuaternion> q) {                                              \
    interpolate_impl<Loop>(pair, tau, t, q);                                                   \
  }                                                                                            \
  void velocities(const PairArrays& pair, double tau, std::span<Vec3> u_trans,                 \
                  std::span<Vec4> u_rot) {                                                     \
    velocities_impl<Loop>(pair, tau, u_trans, u_rot);                                          \
  }                                                                                            \
  void squared_errors(std::span<const Vec3> pred_t, std::span<const Vec4> pred_r,              \
                      std::span<const Vec3> target_t, std::span<const Vec4> target_r,          \
                      std::span<double> err_t, std::span<double> err_r) {                      \
    squared_errors_impl<Loop>(pred_t, pred_r, target_t, target_r, err_t, err_r);               \
  }                                                                                            \
  std::vector<AngleAxisSample> sample_igso3(const igso3::AngleDensityTable& table,             \
                                            std::size_t n, std::uint64_t seed) {               \
    return sample_igso3_impl<Loop>(table, n, seed);                                            \
  }

namespace serial {
RIGIDFLOW_DEFINE_KERNELS(SerialLoop)
}  // namespace serial

namespace parallel {
RIGIDFLOW_DEFINE_KERNELS(ParallelLoop)
}  // namespace parallel

#undef RIGIDFLOW_DEFINE_KERNELS

}  // namespace rigidflow
