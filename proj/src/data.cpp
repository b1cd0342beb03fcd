#include "np/data.hpp"

#include <cmath>
#include <stdexcept>

#include "np/errors.hpp"
#include "np/rng.hpp"

namespace np {

void NPConfig::check() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  if (!(delta1 > 0.0 && delta1 < 1.0))
    throw std::invalid_argument("delta1 must be in (0,1)");
  if (!(delta3 > 0.0 && delta3 < 1.0))
    throw std::invalid_argument("delta3 must be in (0,1)");
  if (!(q_quantile >= 0.0 && q_quantile <= 1.0))
    throw std::invalid_argument("q_quantile must be in [0,1]");
  if (n_permutations < 1)
    throw std::invalid_argument("n_permutations must be >= 1");
}

SplitSizes split_sizes(std::int64_t m, std::int64_t n, std::int64_t d,
                       double delta1, bool screening) {
  if (screening && (m < 8 || n < 4))
    throw DataError("screening requires at least 8 class-0 and 4 class-1 rows");
  const auto log_term = static_cast<std::int64_t>(
      std::ceil(10.0 * std::log(4.0 * static_cast<double>(d) / delta1)));
  SplitSizes s{};
  s.m1 = screening ? std::min(log_term, m / 4) : 0;
  s.n1 = screening ? std::min(log_term, n / 2) : 0;
  s.m2 = m / 2 - s.m1;
  s.n2 = n - s.n1;
  s.m3 = m - m / 2;
  if (s.m2 <= 0 || s.n2 <= 0 || s.m3 < 1)
    throw DataError("insufficient class sample for the split");
  return s;
}

SplitPlan make_split(const LabeledDataset& data, const NPConfig& cfg) {
  cfg.check();
  const Eigen::Index rows = data.features.rows();
  if (data.labels.size() != rows)
    throw DataError("labels length does not match feature rows");

  std::vector<Eigen::Index> class0, class1;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int y = data.labels[i];
    if (y == 0)
      class0.push_back(i);
    else if (y == 1)
      class1.push_back(i);
    else
      throw DataError("labels must be 0 or 1");
  }
  const auto m = static_cast<std::int64_t>(class0.size());
  const auto n = static_cast<std::int64_t>(class1.size());
  if (m == 0 || n == 0) throw DataError("both classes must be present");

  const SplitSizes sizes =
      split_sizes(m, n, data.features.cols(), cfg.delta1,
                  cfg.screening != Screening::none);
  SplitPlan plan;
  plan.m1 = sizes.m1;
  plan.m2 = sizes.m2;
  plan.m3 = sizes.m3;
  plan.n1 = sizes.n1;
  plan.n2 = sizes.n2;

  Rng rng0(derive_seed(cfg.seed, 0));
  Rng rng1(derive_seed(cfg.seed, 1));
  shuffle(class0, rng0);
  shuffle(class1, rng1);

  auto take = [](const std::vector<Eigen::Index>& v, std::int64_t from,
                 std::int64_t count) {
    return std::vector<Eigen::Index>(v.begin() + from,
                                     v.begin() + from + count);
  };
  plan.s0_1 = take(class0, 0, plan.m1);
  plan.s0_2 = take(class0, plan.m1, plan.m2);
  plan.s0_3 = take(class0, plan.m1 + plan.m2, plan.m3);
  plan.s1_1 = take(class1, 0, plan.n1);
  plan.s1_2 = take(class1, plan.n1, plan.n2);
  return plan;
}

std::vector<DataIssue> validate(const LabeledDataset& data) {
  std::vector<DataIssue> issues;
  const Eigen::Index rows = data.features.rows();
  const Eigen::Index cols = data.features.cols();

  for (Eigen::Index c = 0; c < cols; ++c) {
    bool constant = rows > 1;
    const double first = rows > 0 ? data.features(0, c) : 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double v = data.features(r, c);
      if (!std::isfinite(v)) {
        issues.push_back({DataIssue::Kind::non_finite, r, c,
                          "non-finite value at row " + std::to_string(r) +
                              ", column " + std::to_string(c)});
      }
      if (v != first) constant = false;
    }
    if (constant)
      issues.push_back({DataIssue::Kind::constant_feature, -1, c,
                        "feature " + std::to_string(c) + " is constant"});
  }

  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < data.labels.size(); ++i) {
    if (data.labels[i] == 0) has0 = true;
    if (data.labels[i] == 1) has1 = true;
  }
  if (data.labels.size() > 0 && (!has0 || !has1))
    issues.push_back({DataIssue::Kind::single_class, -1, -1,
                      "labels contain a single class"});
  return issues;
}

Eigen::MatrixXd extract_rows(const Eigen::MatrixXd& m,
                             const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    out.row(i) = m.row(idx[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace np
