#ifndef NP_DATA_HPP
#define NP_DATA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace np {

enum class Screening { none, dstat, tstat };
enum class Estimator { parametric, nonparametric };
enum class Kernel { gaussian, epanechnikov };
enum class BandwidthRule { rate_beta2, silverman };
enum class TStatVariant { welch, pooled };

/// Empirical quantile conventions for the permutation cutoff omega(Q).
/// interpolated is the linear-interpolation quantile (R type 7): it sits
/// below the max at small d and its interpolation term breaks the exact
/// lattice ties of D-statistics at the cutoff, which is what reproduces the
/// published screening tables. lower_order_stat takes the sorted value at
/// rank ceil(Q*d).
enum class QuantileRule { interpolated, lower_order_stat };

/// Feature matrix (rows = observations) with binary class labels.
/// Class 0 is the error-controlled class throughout.
struct LabeledDataset {
  Eigen::MatrixXd features;            // N x d
  Eigen::VectorXi labels;              // N, entries in {0,1}
  std::vector<std::string> feature_names;  // empty or size d
};

/// The five-way index partition of the training sample. Index sets hold
/// row indices into the dataset; s1_* exhaust the class-1 rows and s0_*
/// the class-0 rows, pairwise disjointly.
struct SplitPlan {
  std::vector<Eigen::Index> s1_1, s1_2;        // class 1
  std::vector<Eigen::Index> s0_1, s0_2, s0_3;  // class 0
  std::int64_t n1 = 0, n2 = 0, m1 = 0, m2 = 0, m3 = 0;
};

struct NPConfig {
  double alpha = 0.05;
  double delta1 = 0.05;
  double delta3 = 0.05;
  double q_quantile = 0.95;
  Screening screening = Screening::none;
  Estimator estimator = Estimator::parametric;
  std::uint64_t seed = 0;

  // secondary knobs, defaults per the experimental protocol
  Kernel kernel = Kernel::gaussian;
  BandwidthRule bandwidth_rule = BandwidthRule::rate_beta2;
  TStatVariant t_variant = TStatVariant::welch;
  QuantileRule quantile_rule = QuantileRule::interpolated;
  int n_permutations = 1;

  void check() const;  // throws std::invalid_argument on bad fields
};

struct DataIssue {
  enum class Kind { non_finite, constant_feature, single_class };
  Kind kind;
  Eigen::Index row = -1;  // -1 when not cell-specific
  Eigen::Index col = -1;
  std::string message;
};

struct SplitSizes {
  std::int64_t n1, n2, m1, m2, m3;
};

/// The protocol subsample sizes:
///   m1 = min{ceil(10 log(4d/delta1)), floor(m/4)} when screening, else 0
///   n1 = min{ceil(10 log(4d/delta1)), floor(n/2)} when screening, else 0
///   m2 = floor(m/2) - m1,  n2 = n - n1,  m3 = m - floor(m/2)
/// Throws DataError when any estimation subsample comes out empty.
SplitSizes split_sizes(std::int64_t m, std::int64_t n, std::int64_t d,
                       double delta1, bool screening);

/// Splits each class into the screening / estimation / threshold subsamples
/// with the split_sizes counts. Membership is a seeded uniform shuffle
/// within each class.
SplitPlan make_split(const LabeledDataset& data, const NPConfig& cfg);

/// Reports NaN/Inf cells, constant features, and single-class label vectors.
/// An empty result means the dataset is clean.
std::vector<DataIssue> validate(const LabeledDataset& data);

/// Rows of `m` selected by `idx`, in order.
Eigen::MatrixXd extract_rows(const Eigen::MatrixXd& m,
                             const std::vector<Eigen::Index>& idx);

}  // namespace np

#endif  // NP_DATA_HPP
