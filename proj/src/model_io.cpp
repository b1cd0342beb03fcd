#include "np/model_io.hpp"

#include <chrono>
#include <cstdint>
#include <fstream>

#include <json.hpp>

#include "np/errors.hpp"

namespace np {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json cols_to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(vec_to_json(m.col(c)));
  return a;
}

Eigen::MatrixXd cols_from_json(const json& a) {
  const auto cols = static_cast<Eigen::Index>(a.size());
  if (cols == 0) return {};
  const auto rows = static_cast<Eigen::Index>(a[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    m.col(c) = vec_from_json(a[static_cast<std::size_t>(c)]);
  return m;
}

std::string now_rfc3339() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* kernel_name(Kernel k) {
  return k == Kernel::gaussian ? "gaussian" : "epanechnikov";
}

Kernel kernel_from(const std::string& s) {
  if (s == "gaussian") return Kernel::gaussian;
  if (s == "epanechnikov") return Kernel::epanechnikov;
  throw DataError("unknown kernel '" + s + "'");
}

const char* screening_name(Screening s) {
  switch (s) {
    case Screening::none: return "none";
    case Screening::dstat: return "dstat";
    case Screening::tstat: return "tstat";
  }
  return "?";
}

Screening screening_from(const std::string& s) {
  if (s == "none") return Screening::none;
  if (s == "dstat") return Screening::dstat;
  if (s == "tstat") return Screening::tstat;
  throw DataError("unknown screening method '" + s + "'");
}

Variant variant_from(const std::string& s) {
  if (s == "nsn2") return Variant::NSN2;
  if (s == "psn2") return Variant::PSN2;
  if (s == "nn2") return Variant::NN2;
  if (s == "pn2") return Variant::PN2;
  throw DataError("unknown variant '" + s + "'");
}

}  // namespace

std::string fnv1a_hash(const LabeledDataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto absorb = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ull;
    }
  };
  for (Eigen::Index r = 0; r < data.features.rows(); ++r)
    for (Eigen::Index c = 0; c < data.features.cols(); ++c) {
      const double v = data.features(r, c);
      absorb(&v, sizeof(v));
    }
  for (Eigen::Index i = 0; i < data.labels.size(); ++i) {
    const std::int32_t y = data.labels[i];
    absorb(&y, sizeof(y));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void save_model(const std::string& path, const ModelArtifact& artifact) {
  const NPClassifier& clf = artifact.clf;
  json j;
  j["schema_version"] = artifact.schema_version;
  j["variant"] = variant_name(clf.variant);
  j["alpha"] = clf.alpha;
  j["delta1"] = artifact.delta1;
  j["delta3"] = clf.delta3;
  j["q_quantile"] = artifact.q_quantile;
  j["screening"] = screening_name(artifact.screening);

  json sel = json::array();
  for (Eigen::Index s : clf.model.selected) sel.push_back(s);
  j["selected"] = sel;
  j["selected_names"] = artifact.selected_names;

  json model;
  if (clf.model.kind == ModelKind::parametric_gaussian) {
    model["kind"] = "parametric_gaussian";
    model["mu0"] = vec_to_json(clf.model.mu0);
    model["mu1"] = vec_to_json(clf.model.mu1);
    model["sigma2"] = vec_to_json(clf.model.sigma2);
    // cached affine form, stored so predictions round-trip bit-exactly
    model["weights"] = vec_to_json(clf.model.weights);
    model["intercept"] = clf.model.intercept;
  } else {
    model["kind"] = "nonparametric_kde";
    model["kernel"] = kernel_name(clf.model.kernel);
    model["h0"] = vec_to_json(clf.model.h0);
    model["h1"] = vec_to_json(clf.model.h1);
    model["samples0"] = cols_to_json(clf.model.samples0);
    model["samples1"] = cols_to_json(clf.model.samples1);
    model["density_floor_scale"] = clf.model.density_floor_scale;
  }
  model["dim"] = clf.model.dim;
  j["model"] = model;

  j["c_hat"] = clf.c_hat;
  j["k_used"] = clf.k_used;
  j["m3"] = clf.m3;
  j["feasible"] = clf.feasible;
  j["seed"] = artifact.seed;
  j["fingerprint"] = {{"rows0", artifact.train_rows0},
                      {"rows1", artifact.train_rows1},
                      {"d", artifact.train_dim},
                      {"content_hash", artifact.content_hash}};
  j["created_at"] =
      artifact.created_at.empty() ? now_rfc3339() : artifact.created_at;

  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

ModelArtifact load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }

  ModelArtifact artifact;
  artifact.schema_version = j.at("schema_version").get<std::string>();
  NPClassifier& clf = artifact.clf;
  clf.variant = variant_from(j.at("variant").get<std::string>());
  clf.alpha = j.at("alpha").get<double>();
  artifact.delta1 = j.at("delta1").get<double>();
  clf.delta3 = j.at("delta3").get<double>();
  artifact.q_quantile = j.at("q_quantile").get<double>();
  artifact.screening = screening_from(j.at("screening").get<std::string>());

  for (const auto& s : j.at("selected"))
    clf.model.selected.push_back(s.get<Eigen::Index>());
  artifact.selected_names =
      j.at("selected_names").get<std::vector<std::string>>();

  const json& model = j.at("model");
  const std::string kind = model.at("kind").get<std::string>();
  clf.model.dim = model.at("dim").get<Eigen::Index>();
  if (kind == "parametric_gaussian") {
    clf.model.kind = ModelKind::parametric_gaussian;
    clf.model.mu0 = vec_from_json(model.at("mu0"));
    clf.model.mu1 = vec_from_json(model.at("mu1"));
    clf.model.sigma2 = vec_from_json(model.at("sigma2"));
    clf.model.weights = vec_from_json(model.at("weights"));
    clf.model.intercept = model.at("intercept").get<double>();
  } else if (kind == "nonparametric_kde") {
    clf.model.kind = ModelKind::nonparametric_kde;
    clf.model.kernel = kernel_from(model.at("kernel").get<std::string>());
    clf.model.h0 = vec_from_json(model.at("h0"));
    clf.model.h1 = vec_from_json(model.at("h1"));
    clf.model.samples0 = cols_from_json(model.at("samples0"));
    clf.model.samples1 = cols_from_json(model.at("samples1"));
    clf.model.density_floor_scale =
        model.at("density_floor_scale").get<double>();
  } else {
    throw DataError(path + ": unknown model kind '" + kind + "'");
  }

  clf.c_hat = j.at("c_hat").get<double>();
  clf.k_used = j.at("k_used").get<std::int64_t>();
  clf.m3 = j.at("m3").get<std::int64_t>();
  clf.feasible = j.at("feasible").get<bool>();
  artifact.seed = j.at("seed").get<std::uint64_t>();
  const json& fp = j.at("fingerprint");
  artifact.train_rows0 = fp.at("rows0").get<std::int64_t>();
  artifact.train_rows1 = fp.at("rows1").get<std::int64_t>();
  artifact.train_dim = fp.at("d").get<std::int64_t>();
  artifact.content_hash = fp.at("content_hash").get<std::string>();
  artifact.created_at = j.at("created_at").get<std::string>();
  return artifact;
}

}  // namespace np
