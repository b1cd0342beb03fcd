#ifndef NP_MODEL_IO_HPP
#define NP_MODEL_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "np/classify.hpp"

namespace np {

/// On-disk model record. Besides the classifier itself it carries the
/// training configuration and a fingerprint of the training data, so a
/// model file is auditable on its own.
struct ModelArtifact {
  std::string schema_version = "1";
  NPClassifier clf;
  double delta1 = 0.05;
  double q_quantile = 0.95;
  Screening screening = Screening::none;
  std::vector<std::string> selected_names;  // names of selected features
  std::uint64_t seed = 0;
  std::int64_t train_rows0 = 0, train_rows1 = 0, train_dim = 0;
  std::string content_hash;  // FNV-1a over feature/label bits
  std::string created_at;    // RFC 3339, informational only
};

std::string fnv1a_hash(const LabeledDataset& data);

void save_model(const std::string& path, const ModelArtifact& artifact);
ModelArtifact load_model(const std::string& path);

}  // namespace np

#endif  // NP_MODEL_IO_HPP
