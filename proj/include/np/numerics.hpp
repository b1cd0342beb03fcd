#ifndef NP_NUMERICS_HPP
#define NP_NUMERICS_HPP

#include <cstdint>
#include <optional>

namespace np {

/// Parameters of the order-statistic threshold rule: the target type I
/// level alpha, the tolerated violation probability delta3, and the size
/// m3 of the left-out class-0 subsample that supplies the order statistics.
struct ThresholdParams {
  double alpha;
  double delta3;
  std::int64_t m3;
};

/// Constants entering the theory diagnostics: margin/detection constants
/// and orders, the oracle threshold level, and a uniform density-ratio
/// deviation (or an upper bound on it).
struct DiagnosticConstants {
  double delta4;
  double margin_const;        // M0
  double detection_const;     // M1
  double margin_order;        // gamma-bar
  double detection_order;     // gamma-underbar
  double oracle_threshold;    // C_alpha
  double sup_deviation;       // ||r_hat - r||_inf, >= 0
};

/// P{Bin(n, p) <= k}. Exact log-space term summation; returns 0 for k < 0
/// and 1 for k >= n.
double binomial_cdf(std::int64_t n, double p, std::int64_t k);

/// Beta(k, n+1-k) cdf at p, for integer 1 <= k <= n, through the identity
/// 1 - Bin.cdf_{n,p}(k-1) = Beta.cdf_{k,n+1-k}(p). The complement is summed
/// directly over the upper binomial tail so deep-tail values keep their
/// precision instead of cancelling against 1.
double beta_cdf_via_duality(std::int64_t k, std::int64_t n, double p);

/// Upper bound on P{R0(phi_k) > delta} for the k-th order-statistic
/// threshold: Beta.cdf_{k, m3+1-k}(1 - delta). Equality when the score
/// distribution is continuous.
double type1_tail_bound(const ThresholdParams& params, std::int64_t k,
                        double delta);

/// Chebyshev-type type I bound g(delta3, m3, k); valid for 1 <= k <= m3+1
/// and strictly decreasing in k.
double g_bound(const ThresholdParams& params, std::int64_t k);

/// A_{alpha,delta3}(m3), the fraction such that k_min = ceil((m3+1) A).
/// Always in (1-alpha, 1) and converging to 1-alpha as m3 grows.
double a_of_m3(const ThresholdParams& params);

/// Smallest k in {1,...,m3+1} with g_bound(k) <= alpha, via the closed
/// form ceil((m3+1) A). k_min == m3+1 means no k in {1..m3} qualifies;
/// that is a value, not an error: the classifier then falls back to k = m3
/// without the high-probability guarantee.
std::int64_t k_min(const ThresholdParams& params);

/// True when the guarantee-carrying choice k_min is usable, i.e.
/// k_min <= m3. Implied by m3 >= 4/(alpha*delta3) but can also hold below
/// that sufficient bound.
bool threshold_feasible(const ThresholdParams& params);

/// Chernoff-type type I bound h(delta3, m3, k) for 1 <= k <= m3.
/// Returns +infinity when the bound's denominator is non-positive
/// (the bound is vacuous there).
double h_bound(const ThresholdParams& params, std::int64_t k);

/// Smallest k in {1,...,m3} with h_bound(k) <= alpha, by linear scan.
/// Empty when no such k exists. Exact ties h == alpha count as feasible.
std::optional<std::int64_t> k_chern(const ThresholdParams& params);

/// Conventions for the k_chern-vs-k_min comparison count when K_chern is
/// empty for some (alpha, m3) cells of the grid.
enum class ChernCountConvention {
  all_combos,         // every grid cell is a denominator member; empty
                      // K_chern cells simply cannot contribute a win
  both_nonempty,      // only cells with k_min <= m3 and K_chern non-empty
};

/// #{k_chern < k_min} over the grid alpha in {0.01..0.10} x m3 in
/// {100..1000}, for a fixed delta3.
int count_kchern_below_kmin(double delta3, ChernCountConvention convention);

/// High-probability bound xi on |R0(phi-hat) - alpha|; requires the
/// guarantee to be feasible (k_min <= m3).
double xi_bound(const ThresholdParams& params, double delta4);

/// Bound on the excess type II error R1(phi-hat) - R1(phi*) given margin
/// and detection constants plus a uniform density-ratio deviation.
double excess_type2_bound(const ThresholdParams& params,
                          const DiagnosticConstants& diag);

/// Uniform deviation bound T = B e^B ||r||_inf for the screened kernel
/// density-ratio estimate. Throws std::domain_error when the bound is
/// vacuous (a deviation term reaches the density lower bound mu).
double deviation_bound(std::int64_t s, std::int64_t n2, std::int64_t m2,
                       double h1, double h0, double delta2, double c1,
                       double c0, double mu_floor, double r_sup);

}  // namespace np

#endif  // NP_NUMERICS_HPP
