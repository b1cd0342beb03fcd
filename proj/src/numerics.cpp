#include "np/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace np {

namespace {

void check_params(const ThresholdParams& p) {
  if (!(p.alpha > 0.0 && p.alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  if (!(p.delta3 > 0.0 && p.delta3 < 1.0))
    throw std::invalid_argument("delta3 must be in (0,1)");
  if (p.m3 < 1) throw std::invalid_argument("m3 must be >= 1");
}

// Probability-valued results are clamped to [0,1]; drift beyond 1e-12 would
// indicate a summation bug rather than roundoff, so it is not silently eaten.
double clamp_probability(double x) {
  if (x < -1e-12 || x > 1.0 + 1e-12)
    throw std::logic_error("probability left [0,1] by more than 1e-12: " +
                           std::to_string(x));
  if (x < 0.0) return 0.0;
  if (x > 1.0) return 1.0;
  return x;
}

double log_binom_pmf(std::int64_t n, std::int64_t i, double log_p,
                     double log_q) {
  const double nn = static_cast<double>(n);
  const double ii = static_cast<double>(i);
  const double log_choose = std::lgamma(nn + 1.0) - std::lgamma(ii + 1.0) -
                            std::lgamma(nn - ii + 1.0);
  return log_choose + ii * log_p + (nn - ii) * log_q;
}

// Kahan-compensated sum of binomial masses over i in [lo, hi].
double binom_mass_sum(std::int64_t n, double p, std::int64_t lo,
                      std::int64_t hi) {
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  double sum = 0.0, comp = 0.0;
  for (std::int64_t i = lo; i <= hi; ++i) {
    const double term = std::exp(log_binom_pmf(n, i, log_p, log_q));
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

double binomial_cdf(std::int64_t n, double p, std::int64_t k) {
  if (n < 0) throw std::invalid_argument("binomial_cdf: n must be >= 0");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binomial_cdf: p must be in [0,1]");
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (p == 0.0) return 1.0;  // all mass at 0 and k >= 0 here
  if (p == 1.0) return 0.0;  // all mass at n and k < n here
  return clamp_probability(binom_mass_sum(n, p, 0, k));
}

double beta_cdf_via_duality(std::int64_t k, std::int64_t n, double p) {
  if (n < 1 || k < 1 || k > n)
    throw std::domain_error("beta_cdf_via_duality: need 1 <= k <= n");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("beta_cdf_via_duality: p must be in [0,1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  // 1 - Bin.cdf(k-1) summed directly as the upper binomial tail.
  return clamp_probability(binom_mass_sum(n, p, k, n));
}

double type1_tail_bound(const ThresholdParams& params, std::int64_t k,
                        double delta) {
  check_params(params);
  if (k < 1 || k > params.m3)
    throw std::domain_error("type1_tail_bound: need 1 <= k <= m3");
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("type1_tail_bound: delta must be in [0,1]");
  return beta_cdf_via_duality(k, params.m3, 1.0 - delta);
}

double g_bound(const ThresholdParams& params, std::int64_t k) {
  check_params(params);
  const std::int64_t m3 = params.m3;
  if (k < 1 || k > m3 + 1)
    throw std::domain_error("g_bound: need 1 <= k <= m3+1");
  const double md = static_cast<double>(m3);
  const double kd = static_cast<double>(k);
  const double head = (md + 1.0 - kd) / (md + 1.0);
  const double tail = std::sqrt(
      kd * (md + 1.0 - kd) /
      (params.delta3 * (md + 2.0) * (md + 1.0) * (md + 1.0)));
  return head + tail;
}

double a_of_m3(const ThresholdParams& params) {
  check_params(params);
  const double d3 = params.delta3;
  const double al = params.alpha;
  const double m2 = static_cast<double>(params.m3) + 2.0;
  const double num =
      1.0 + 2.0 * d3 * m2 * (1.0 - al) +
      std::sqrt(1.0 + 4.0 * d3 * (1.0 - al) * al * m2);
  return num / (2.0 * (d3 * m2 + 1.0));
}

std::int64_t k_min(const ThresholdParams& params) {
  const double a = a_of_m3(params);
  const double raw = (static_cast<double>(params.m3) + 1.0) * a;
  auto k = static_cast<std::int64_t>(std::ceil(raw));
  if (k < 1) k = 1;
  if (k > params.m3 + 1) k = params.m3 + 1;
  return k;
}

bool threshold_feasible(const ThresholdParams& params) {
  return k_min(params) <= params.m3;
}

double h_bound(const ThresholdParams& params, std::int64_t k) {
  check_params(params);
  const std::int64_t m3 = params.m3;
  if (k < 1 || k > m3)
    throw std::domain_error("h_bound: need 1 <= k <= m3");
  const double md = static_cast<double>(m3);
  const double kd = static_cast<double>(k);
  const double root = 2.0 * std::sqrt(std::log(2.0 / params.delta3));
  const double numer = md + 1.0 - kd + root * std::sqrt(md - kd + 1.0);
  const double denom =
      md + 1.0 + root * (std::sqrt(md - kd + 1.0) - std::sqrt(kd));
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return numer / denom;
}

std::optional<std::int64_t> k_chern(const ThresholdParams& params) {
  check_params(params);
  for (std::int64_t k = 1; k <= params.m3; ++k) {
    if (h_bound(params, k) <= params.alpha) return k;
  }
  return std::nullopt;
}

int count_kchern_below_kmin(double delta3, ChernCountConvention convention) {
  int count = 0;
  for (int ai = 1; ai <= 10; ++ai) {
    for (int mi = 1; mi <= 10; ++mi) {
      const ThresholdParams p{0.01 * ai, delta3, 100 * mi};
      const std::int64_t km = k_min(p);  // ceiling formula, may be m3+1
      const auto kc = k_chern(p);
      if (!kc.has_value()) continue;
      if (convention == ChernCountConvention::both_nonempty && km > p.m3)
        continue;
      if (*kc < km) ++count;
    }
  }
  return count;
}

double xi_bound(const ThresholdParams& params, double delta4) {
  check_params(params);
  if (!(delta4 > 0.0 && delta4 < 1.0))
    throw std::invalid_argument("xi_bound: delta4 must be in (0,1)");
  const std::int64_t km = k_min(params);
  if (km > params.m3)
    throw std::domain_error(
        "xi_bound: threshold guarantee infeasible (k_min > m3)");
  const double md = static_cast<double>(params.m3);
  const double kd = static_cast<double>(km);
  const double spread =
      std::sqrt(kd * (md + 1.0 - kd) /
                ((md + 2.0) * (md + 1.0) * (md + 1.0) * delta4));
  return spread + a_of_m3(params) - (1.0 - params.alpha) + 1.0 / (md + 1.0);
}

double excess_type2_bound(const ThresholdParams& params,
                          const DiagnosticConstants& diag) {
  check_params(params);
  if (!(diag.delta4 > 0.0 && diag.delta4 < 1.0))
    throw std::invalid_argument("excess_type2_bound: delta4 must be in (0,1)");
  if (diag.margin_const <= 0.0 || diag.detection_const <= 0.0 ||
      diag.margin_order <= 0.0 || diag.detection_order <= 0.0 ||
      diag.oracle_threshold <= 0.0)
    throw std::domain_error("excess_type2_bound: constants must be positive");
  if (diag.sup_deviation < 0.0)
    throw std::domain_error("excess_type2_bound: sup_deviation must be >= 0");
  const double md = static_cast<double>(params.m3);
  if (md < 4.0 / (params.alpha * params.delta3) ||
      md < 1.0 / (params.delta3 * params.delta3) ||
      md < 1.0 / (diag.delta4 * diag.delta4))
    throw std::domain_error(
        "excess_type2_bound: m3 below max{4/(alpha delta3), delta3^-2, "
        "delta4^-2}");
  const double rate = 0.4 * std::pow(md, 0.25);
  const double detection_term =
      std::pow(rate * diag.detection_const, -1.0 / diag.detection_order);
  const double margin_part =
      2.0 * diag.margin_const *
      std::pow(detection_term + 2.0 * diag.sup_deviation,
               1.0 + diag.margin_order);
  return margin_part + diag.oracle_threshold / rate;
}

double deviation_bound(std::int64_t s, std::int64_t n2, std::int64_t m2,
                       double h1, double h0, double delta2, double c1,
                       double c0, double mu_floor, double r_sup) {
  if (s < 1) throw std::invalid_argument("deviation_bound: s must be >= 1");
  if (n2 < 1 || m2 < 1)
    throw std::invalid_argument("deviation_bound: n2, m2 must be >= 1");
  if (h1 <= 0.0 || h0 <= 0.0)
    throw std::invalid_argument("deviation_bound: bandwidths must be > 0");
  if (!(delta2 > 0.0 && delta2 < 1.0))
    throw std::invalid_argument("deviation_bound: delta2 must be in (0,1)");
  if (c1 <= 0.0 || c0 <= 0.0 || mu_floor <= 0.0 || r_sup <= 0.0)
    throw std::invalid_argument("deviation_bound: constants must be > 0");

  const double sd = static_cast<double>(s);
  const double dev1 =
      c1 * std::sqrt(std::log(2.0 * static_cast<double>(n2) * sd / delta2) /
                     (static_cast<double>(n2) * h1));
  const double dev0 =
      c0 * std::sqrt(std::log(2.0 * static_cast<double>(m2) * sd / delta2) /
                     (static_cast<double>(m2) * h0));
  if (dev1 >= mu_floor || dev0 >= mu_floor)
    throw std::domain_error(
        "deviation_bound: vacuous bound, kernel deviation term reaches the "
        "density floor mu");
  const double b = sd * (dev1 / (mu_floor - dev1) + dev0 / (mu_floor - dev0));
  return b * std::exp(b) * r_sup;
}

}  // namespace np
