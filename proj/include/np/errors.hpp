#ifndef NP_ERRORS_HPP
#define NP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace np {

/// Raised on malformed or unusable input data (bad CSV cells, missing
/// classes, zero-variance features selected for a parametric fit, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a screening step cannot proceed or selects nothing.
class ScreeningError : public std::runtime_error {
 public:
  explicit ScreeningError(const std::string& what, long long min_required = 0)
      : std::runtime_error(what), min_required_(min_required) {}

  /// Minimal subsample size that would satisfy the failed precondition,
  /// 0 when not applicable.
  long long min_required() const noexcept { return min_required_; }

 private:
  long long min_required_;
};

}  // namespace np

#endif  // NP_ERRORS_HPP
