#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sddkit/error.hpp"

namespace sddkit {

using Vector = std::vector<double>;

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": expected length " +
                         std::to_string(a) + ", got " + std::to_string(b));
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double mean(std::span<const double> a) {
  if (a.empty()) return 0.0;
  return std::accumulate(a.begin(), a.end(), 0.0) /
         static_cast<double>(a.size());
}

/// Subtracts the mean in place and returns the amount removed.
inline double project_mean_zero(std::span<double> a) {
  const double m = mean(a);
  for (double& v : a) v -= m;
  return m;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(y.size(), x.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace sddkit
