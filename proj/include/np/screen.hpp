#ifndef NP_SCREEN_HPP
#define NP_SCREEN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "np/data.hpp"

namespace np {

enum class CutoffKind { theoretical_tau, permutation_q };

struct ScreeningResult {
  std::vector<Eigen::Index> selected;  // {j : stat_values[j] >= cutoff}
  Eigen::VectorXd stat_values;         // D_j or |t_j|, length d
  double cutoff = 0.0;
  Screening method = Screening::dstat;
  CutoffKind cutoff_kind = CutoffKind::permutation_q;
};

/// Per-feature two-sample Kolmogorov-Smirnov statistics
/// D_j = sup_x |F0_j(x) - F1_j(x)|, computed exactly by a merged sweep
/// over the pooled sorted sample of each feature.
Eigen::VectorXd d_statistics(const Eigen::MatrixXd& class0,
                             const Eigen::MatrixXd& class1);

/// Per-feature absolute two-sample t statistics. Welch by default; the
/// pooled-variance variant is available. A feature with zero variance in
/// both classes gets |t| = 0 when the means agree and a large sentinel
/// (always selected) when they differ.
Eigen::VectorXd t_statistics(const Eigen::MatrixXd& class0,
                             const Eigen::MatrixXd& class1,
                             TStatVariant variant = TStatVariant::welch);

inline constexpr double kTStatSentinel = 1e300;

struct TauInterval {
  double lo;  // Delta0
  double hi;  // D - Delta0
};

/// Exact-recovery cutoff interval [Delta0, D - Delta0] with
/// Delta0 = sqrt(log(4d/delta1)/(2 n1)) + sqrt(log(4d/delta1)/(2 m1)).
/// Requires n1 ^ m1 >= 8 D^-2 log(4d/delta1); throws ScreeningError carrying
/// the minimal required size otherwise.
TauInterval theoretical_tau(std::int64_t d, std::int64_t n1, std::int64_t m1,
                            double delta1, double big_d);

/// Permutation null cutoff omega(Q): permute the pooled labels once (or
/// n_permutations times, averaging the cutoffs), recompute the per-feature
/// null statistics, and take the Q-th empirical quantile of the d null
/// values under the given convention.
double permutation_cutoff(const Eigen::MatrixXd& class0,
                          const Eigen::MatrixXd& class1, Screening method,
                          double q, std::uint64_t seed,
                          TStatVariant t_variant = TStatVariant::welch,
                          QuantileRule rule = QuantileRule::interpolated,
                          int n_permutations = 1);

/// Q-th empirical quantile of `values` (not required sorted) under `rule`.
double empirical_quantile(std::vector<double> values, double q,
                          QuantileRule rule);

/// Full screening step: statistics per cfg.screening, cutoff by permutation
/// (default) or by the theoretical interval midpoint when the signal
/// strength D is supplied. Throws ScreeningError when nothing survives.
ScreeningResult screen(const Eigen::MatrixXd& class0,
                       const Eigen::MatrixXd& class1, const NPConfig& cfg,
                       std::uint64_t seed,
                       std::optional<double> signal_strength = std::nullopt);

}  // namespace np

#endif  // NP_SCREEN_HPP
