#include "np/screen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "np/errors.hpp"
#include "np/rng.hpp"
#include "np/stats.hpp"

namespace np {

namespace {

double ks_of_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double welch_or_pooled(double mean0, double var0, double n0, double mean1,
                       double var1, double n1, TStatVariant variant) {
  const double diff = mean1 - mean0;
  if (var0 == 0.0 && var1 == 0.0)
    return diff == 0.0 ? 0.0 : kTStatSentinel;
  double denom;
  if (variant == TStatVariant::welch) {
    denom = std::sqrt(var1 / n1 + var0 / n0);
  } else {
    const double pooled =
        ((n0 - 1.0) * var0 + (n1 - 1.0) * var1) / (n0 + n1 - 2.0);
    denom = std::sqrt(pooled * (1.0 / n0 + 1.0 / n1));
  }
  if (denom == 0.0) return diff == 0.0 ? 0.0 : kTStatSentinel;
  return std::abs(diff) / denom;
}

void mean_var(const Eigen::Ref<const Eigen::VectorXd>& col, double& mean,
              double& var) {
  const double n = static_cast<double>(col.size());
  mean = col.mean();
  var = n > 1.0 ? (col.array() - mean).square().sum() / (n - 1.0) : 0.0;
}

}  // namespace

Eigen::VectorXd d_statistics(const Eigen::MatrixXd& class0,
                             const Eigen::MatrixXd& class1) {
  if (class0.rows() == 0 || class1.rows() == 0)
    throw std::invalid_argument("d_statistics: both classes must be nonempty");
  if (class0.cols() != class1.cols())
    throw std::invalid_argument("d_statistics: dimension mismatch");
  const Eigen::Index d = class0.cols();
  Eigen::VectorXd out(d);
  std::vector<double> a(static_cast<std::size_t>(class0.rows()));
  std::vector<double> b(static_cast<std::size_t>(class1.rows()));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index r = 0; r < class0.rows(); ++r)
      a[static_cast<std::size_t>(r)] = class0(r, j);
    for (Eigen::Index r = 0; r < class1.rows(); ++r)
      b[static_cast<std::size_t>(r)] = class1(r, j);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    out[j] = ks_of_sorted(a, b);
  }
  return out;
}

Eigen::VectorXd t_statistics(const Eigen::MatrixXd& class0,
                             const Eigen::MatrixXd& class1,
                             TStatVariant variant) {
  if (class0.rows() < 2 || class1.rows() < 2)
    throw std::invalid_argument("t_statistics: each class needs >= 2 rows");
  if (class0.cols() != class1.cols())
    throw std::invalid_argument("t_statistics: dimension mismatch");
  const Eigen::Index d = class0.cols();
  Eigen::VectorXd out(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double mean0, var0, mean1, var1;
    mean_var(class0.col(j), mean0, var0);
    mean_var(class1.col(j), mean1, var1);
    out[j] = welch_or_pooled(mean0, var0, static_cast<double>(class0.rows()),
                             mean1, var1, static_cast<double>(class1.rows()),
                             variant);
  }
  return out;
}

TauInterval theoretical_tau(std::int64_t d, std::int64_t n1, std::int64_t m1,
                            double delta1, double big_d) {
  if (d < 1) throw std::invalid_argument("theoretical_tau: d must be >= 1");
  if (n1 < 1 || m1 < 1)
    throw std::invalid_argument("theoretical_tau: subsample sizes must be >= 1");
  if (!(delta1 > 0.0 && delta1 < 1.0))
    throw std::invalid_argument("theoretical_tau: delta1 must be in (0,1)");
  if (!(big_d > 0.0 && big_d <= 1.0))
    throw std::invalid_argument("theoretical_tau: D must be in (0,1]");
  const double log_term = std::log(4.0 * static_cast<double>(d) / delta1);
  const double required = 8.0 / (big_d * big_d) * log_term;
  const double smaller = static_cast<double>(std::min(n1, m1));
  if (smaller < required - 1e-9) {
    const auto min_size = static_cast<long long>(std::ceil(required));
    throw ScreeningError(
        "insufficient screening subsample: need n1 and m1 >= " +
            std::to_string(min_size),
        min_size);
  }
  const double delta0 =
      std::sqrt(log_term / (2.0 * static_cast<double>(n1))) +
      std::sqrt(log_term / (2.0 * static_cast<double>(m1)));
  return {delta0, big_d - delta0};
}

double empirical_quantile(std::vector<double> values, double q,
                          QuantileRule rule) {
  if (values.empty())
    throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("empirical_quantile: q must be in [0,1]");
  std::sort(values.begin(), values.end());
  const auto d = values.size();
  if (rule == QuantileRule::lower_order_stat) {
    const auto rank = std::clamp<long long>(
        ceil_tol(q * static_cast<double>(d)), 1, static_cast<long long>(d));
    return values[static_cast<std::size_t>(rank - 1)];
  }
  // linear interpolation between order statistics (R type 7)
  const double h = (static_cast<double>(d) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= d) return values.back();
  const double frac = h - std::floor(h);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double permutation_cutoff(const Eigen::MatrixXd& class0,
                          const Eigen::MatrixXd& class1, Screening method,
                          double q, std::uint64_t seed,
                          TStatVariant t_variant, QuantileRule rule,
                          int n_permutations) {
  if (method == Screening::none)
    throw std::invalid_argument("permutation_cutoff: method must be a statistic");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("permutation_cutoff: q must be in [0,1]");
  const Eigen::Index m = class0.rows();
  const Eigen::Index n = class1.rows();
  if (m + n < 4)
    throw std::invalid_argument("permutation_cutoff: pooled sample too small");
  const Eigen::Index d = class0.cols();

  Eigen::MatrixXd pooled(m + n, d);
  pooled.topRows(m) = class0;
  pooled.bottomRows(n) = class1;

  Rng rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m + n));
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<Eigen::Index>(i);

  double cutoff_sum = 0.0;
  for (int b = 0; b < n_permutations; ++b) {
    shuffle(order, rng);
    // permuted null groups keep the original sizes m and n
    Eigen::MatrixXd null0(m, d), null1(n, d);
    for (Eigen::Index i = 0; i < m; ++i)
      null0.row(i) = pooled.row(order[static_cast<std::size_t>(i)]);
    for (Eigen::Index i = 0; i < n; ++i)
      null1.row(i) = pooled.row(order[static_cast<std::size_t>(m + i)]);
    Eigen::VectorXd null_stats = method == Screening::dstat
                                     ? d_statistics(null0, null1)
                                     : t_statistics(null0, null1, t_variant);
    cutoff_sum += empirical_quantile(
        std::vector<double>(null_stats.data(), null_stats.data() + d), q,
        rule);
  }
  return cutoff_sum / n_permutations;
}

ScreeningResult screen(const Eigen::MatrixXd& class0,
                       const Eigen::MatrixXd& class1, const NPConfig& cfg,
                       std::uint64_t seed,
                       std::optional<double> signal_strength) {
  if (cfg.screening == Screening::none)
    throw std::invalid_argument("screen: cfg.screening is none");
  ScreeningResult res;
  res.method = cfg.screening;
  res.stat_values = cfg.screening == Screening::dstat
                        ? d_statistics(class0, class1)
                        : t_statistics(class0, class1, cfg.t_variant);

  if (signal_strength.has_value()) {
    const TauInterval interval =
        theoretical_tau(class0.cols(), class1.rows(), class0.rows(),
                        cfg.delta1, *signal_strength);
    res.cutoff = 0.5 * (interval.lo + interval.hi);
    res.cutoff_kind = CutoffKind::theoretical_tau;
  } else {
    res.cutoff = permutation_cutoff(class0, class1, cfg.screening,
                                    cfg.q_quantile, seed, cfg.t_variant,
                                    cfg.quantile_rule, cfg.n_permutations);
    res.cutoff_kind = CutoffKind::permutation_q;
  }

  for (Eigen::Index j = 0; j < res.stat_values.size(); ++j)
    if (res.stat_values[j] >= res.cutoff) res.selected.push_back(j);
  if (res.selected.empty())
    throw ScreeningError("no features survive screening");
  return res;
}

}  // namespace np
