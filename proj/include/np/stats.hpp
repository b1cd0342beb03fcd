#ifndef NP_STATS_HPP
#define NP_STATS_HPP

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace np {

/// Standard normal cdf.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

/// Standard normal quantile (Acklam's rational approximation followed by
/// one Halley refinement; accurate to full double precision away from 0/1).
double normal_quantile(double p);

/// Ceiling that forgives values sitting a hair above an integer, so that
/// expressions like 1000 * 0.95 round to 950 rather than 951.
inline long long ceil_tol(double x) {
  return static_cast<long long>(std::ceil(x - 1e-9));
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sd / sqrt(count)
  std::size_t count = 0;
};

MeanSe mean_se(const std::vector<double>& values);

}  // namespace np

#endif  // NP_STATS_HPP
