#ifndef NP_CSV_HPP
#define NP_CSV_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "np/data.hpp"

namespace np {

/// Raw CSV contents: a header row plus string cells. Comma-separated,
/// UTF-8, decimal point, no quoting of numeric fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Eigen::Index col_index(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path);

/// Builds a LabeledDataset from a CSV: the label column is selected by
/// name, the literal `class0_value` maps to label 0, and exactly one other
/// distinct label value (mapped to 1) is allowed. All remaining columns
/// must parse as doubles and become features.
LabeledDataset read_labeled_csv(const std::string& path,
                                const std::string& label_col,
                                const std::string& class0_value);

/// Shortest round-trip decimal formatting of a double.
std::string format_double(double v);

double parse_double(const std::string& cell, const std::string& context);

}  // namespace np

#endif  // NP_CSV_HPP
