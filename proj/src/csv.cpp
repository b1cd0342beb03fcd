#include "np/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "np/errors.hpp"

namespace np {

Eigen::Index CsvTable::col_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<Eigen::Index>(i);
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  table.header = split_line(strip_cr(line));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != table.header.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(table.header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

double parse_double(const std::string& cell, const std::string& context) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw DataError(context + ": cannot parse '" + cell + "' as a number");
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

LabeledDataset read_labeled_csv(const std::string& path,
                                const std::string& label_col,
                                const std::string& class0_value) {
  const CsvTable table = read_csv(path);
  const Eigen::Index label_idx = table.col_index(label_col);
  if (label_idx < 0)
    throw DataError(path + ": no column named '" + label_col + "'");

  const auto d = static_cast<Eigen::Index>(table.header.size()) - 1;
  if (d < 1) throw DataError(path + ": no feature columns");
  const auto n = static_cast<Eigen::Index>(table.rows.size());

  LabeledDataset data;
  data.features.resize(n, d);
  data.labels.resize(n);
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (static_cast<Eigen::Index>(i) != label_idx)
      data.feature_names.push_back(table.header[i]);

  std::string class1_value;
  bool class1_seen = false;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    const std::string& label = row[static_cast<std::size_t>(label_idx)];
    if (label == class0_value) {
      data.labels[r] = 0;
    } else {
      if (!class1_seen) {
        class1_value = label;
        class1_seen = true;
      } else if (label != class1_value) {
        throw DataError(path + ": more than two label values ('" +
                        class0_value + "', '" + class1_value + "', '" + label +
                        "')");
      }
      data.labels[r] = 1;
    }
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (static_cast<Eigen::Index>(j) == label_idx) continue;
      data.features(r, c) =
          parse_double(row[j], path + " row " + std::to_string(r + 2) +
                                   " column " + table.header[j]);
      ++c;
    }
  }
  return data;
}

}  // namespace np
