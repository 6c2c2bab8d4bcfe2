#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace levyhom {

/// Largest supported position/momentum or mark dimension. Vectors and
/// matrices below keep their storage inline up to this size, so the
/// integrator hot loops never touch the heap.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Neumaier compensated sum. Used wherever results must not depend on
/// reduction order beyond roundoff.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Counter-based seed derivation (splitmix64 finalizer). A path's seed
/// depends only on the master seed and the path index.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t path_index) {
  return mix64(mix64(master_seed) ^ mix64(path_index + 0x632be59bd9b4e019ULL));
}

}  // namespace levyhom
