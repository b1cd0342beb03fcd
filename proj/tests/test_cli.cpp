#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "np/classify.hpp"
#include "np/cli.hpp"
#include "np/csv.hpp"
#include "np/model_io.hpp"
#include "np/numerics.hpp"
#include "np/rng.hpp"
#include "np/sim.hpp"

using namespace np;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("np_cli_test_" + std::to_string(Rng(std::random_device{}())
                                                .next_u64() %
                                            1000000));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

LabeledDataset example1_train(std::int64_t d, std::int64_t m, std::int64_t n,
                              std::uint64_t seed) {
  LabeledDataset data;
  data.features.resize(m + n, d);
  data.features.topRows(m) = gen_example1(d, m, 0, derive_seed(seed, 0));
  data.features.bottomRows(n) = gen_example1(d, n, 1, derive_seed(seed, 1));
  data.labels.resize(m + n);
  data.labels.head(m).setZero();
  data.labels.tail(n).setOnes();
  for (std::int64_t j = 0; j < d; ++j)
    data.feature_names.push_back("f" + std::to_string(j));
  return data;
}

void write_labeled_csv(const std::string& path, const LabeledDataset& data,
                       const std::vector<int>& col_order = {}) {
  std::ofstream out(path);
  const auto d = data.features.cols();
  std::vector<int> order(col_order);
  if (order.empty())
    for (int j = 0; j < d; ++j) order.push_back(j);
  for (int j : order) out << data.feature_names[j] << ',';
  out << "label\n";
  for (Eigen::Index r = 0; r < data.features.rows(); ++r) {
    for (int j : order) out << format_double(data.features(r, j)) << ',';
    out << (data.labels[r] == 0 ? "sick" : "healthy") << '\n';
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_created_at(const std::string& json_text) {
  std::string out;
  std::stringstream ss(json_text);
  std::string line;
  while (std::getline(ss, line))
    if (line.find("created_at") == std::string::npos) out += line + '\n';
  return out;
}

int run(std::initializer_list<std::string> args, std::string* captured = nullptr) {
  std::ostringstream sink;
  std::streambuf* old = std::cout.rdbuf(sink.rdbuf());
  const int rc = run_cli(std::vector<std::string>(args));
  std::cout.rdbuf(old);
  if (captured) *captured = sink.str();
  return rc;
}

}  // namespace

TEST_CASE("train writes a model whose k matches the threshold theory") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3001);
  write_labeled_csv(dir.file("train.csv"), data);

  std::string out;
  const int rc = run({"train", "--data", dir.file("train.csv"),
                      "--label-col", "label", "--class0-value", "sick",
                      "--variant", "pn2", "--seed", "7", "--out",
                      dir.file("model.json")},
                     &out);
  CHECK(rc == 0);
  CHECK(out.find("m3: 200") != std::string::npos);

  const ModelArtifact artifact = load_model(dir.file("model.json"));
  CHECK(artifact.clf.k_used == k_min({0.05, 0.05, 200}));
  CHECK(artifact.clf.m3 == 200);
  CHECK(artifact.clf.feasible);
  CHECK(artifact.train_dim == 10);
  CHECK(artifact.train_rows0 == 400);
}

TEST_CASE("usage errors exit 1") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3002);
  write_labeled_csv(dir.file("train.csv"), data);
  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--alpha", "1.5"}) == 1);
  CHECK(run({"no-such-command"}) == 1);
  CHECK(run({"simulate", "--example", "3", "--out", dir.file("r")}) == 1);
}

TEST_CASE("training is deterministic up to the timestamp") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3003);
  write_labeled_csv(dir.file("train.csv"), data);
  for (const char* name : {"a.json", "b.json"}) {
    CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
               "label", "--class0-value", "sick", "--variant", "nsn2",
               "--seed", "42", "--out", dir.file(name)}) == 0);
  }
  CHECK(strip_created_at(slurp(dir.file("a.json"))) ==
        strip_created_at(slurp(dir.file("b.json"))));
}

TEST_CASE("predictions over the left-out subsample honor the order statistic") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3004);
  write_labeled_csv(dir.file("train.csv"), data);
  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--variant", "pn2", "--seed",
             "11", "--out", dir.file("model.json")}) == 0);
  const ModelArtifact artifact = load_model(dir.file("model.json"));

  // reconstruct the split the trainer used (same data, config, seed)
  NPConfig cfg;
  cfg.seed = 11;
  const SplitPlan plan = make_split(data, cfg);
  LabeledDataset holdout;
  holdout.features = extract_rows(data.features, plan.s0_3);
  holdout.feature_names = data.feature_names;
  {
    std::ofstream out(dir.file("holdout.csv"));
    for (std::int64_t j = 0; j < 10; ++j) out << "f" << j << (j < 9 ? "," : "\n");
    for (Eigen::Index r = 0; r < holdout.features.rows(); ++r) {
      for (Eigen::Index c = 0; c < 10; ++c)
        out << format_double(holdout.features(r, c)) << (c < 9 ? "," : "\n");
    }
  }
  CHECK(run({"predict", "--model", dir.file("model.json"), "--data",
             dir.file("holdout.csv"), "--out", dir.file("pred.csv")}) == 0);

  const CsvTable pred = read_csv(dir.file("pred.csv"));
  REQUIRE(pred.rows.size() == static_cast<std::size_t>(plan.m3));
  std::int64_t ones = 0;
  for (const auto& row : pred.rows)
    if (row[2] == "1") ++ones;
  CHECK(ones == artifact.clf.m3 - artifact.clf.k_used + 1);
}

TEST_CASE("empty input produces an empty prediction file") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3005);
  write_labeled_csv(dir.file("train.csv"), data);
  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--out",
             dir.file("model.json")}) == 0);
  {
    std::ofstream out(dir.file("empty.csv"));
    out << "f0,f1,f2,f3,f4,f5,f6,f7,f8,f9\n";
  }
  CHECK(run({"predict", "--model", dir.file("model.json"), "--data",
             dir.file("empty.csv"), "--out", dir.file("pred.csv")}) == 0);
  const CsvTable pred = read_csv(dir.file("pred.csv"));
  CHECK(pred.header.size() == 3);
  CHECK(pred.rows.empty());
}

TEST_CASE("column order is bound by name") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3006);
  write_labeled_csv(dir.file("train.csv"), data);
  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--variant", "nn2",
             "--seed", "5", "--out", dir.file("model.json")}) == 0);

  const LabeledDataset fresh = example1_train(10, 30, 30, 3007);
  write_labeled_csv(dir.file("straight.csv"), fresh);
  write_labeled_csv(dir.file("permuted.csv"), fresh,
                    {9, 3, 0, 7, 1, 8, 2, 6, 4, 5});

  CHECK(run({"predict", "--model", dir.file("model.json"), "--data",
             dir.file("straight.csv"), "--out", dir.file("a.csv")}) == 0);
  CHECK(run({"predict", "--model", dir.file("model.json"), "--data",
             dir.file("permuted.csv"), "--out", dir.file("b.csv")}) == 0);
  CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
}

TEST_CASE("dimension mismatches exit 2") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3008);
  write_labeled_csv(dir.file("train.csv"), data);
  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--out",
             dir.file("model.json")}) == 0);
  {
    std::ofstream out(dir.file("narrow.csv"));
    out << "x0,x1,x2\n1,2,3\n";
  }
  CHECK(run({"predict", "--model", dir.file("model.json"), "--data",
             dir.file("narrow.csv"), "--out", dir.file("pred.csv")}) == 2);
}

TEST_CASE("data validation failures exit 2") {
  TempDir dir;
  std::ofstream out(dir.file("bad.csv"));
  out << "f0,f1,label\n1.0,2.0,sick\n3.0,not_a_number,healthy\n";
  out.close();
  CHECK(run({"train", "--data", dir.file("bad.csv"), "--label-col", "label",
             "--class0-value", "sick"}) == 2);
  CHECK(run({"train", "--data", dir.file("missing.csv"), "--label-col",
             "label", "--class0-value", "sick"}) == 2);
}

TEST_CASE("infeasible guarantees exit 3 unless allowed") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 12, 12, 3009);
  write_labeled_csv(dir.file("train.csv"), data);
  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--out",
             dir.file("model.json")}) == 3);
  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--allow-infeasible",
             "--out", dir.file("model.json")}) == 0);
  const ModelArtifact artifact = load_model(dir.file("model.json"));
  CHECK_FALSE(artifact.clf.feasible);
  CHECK(artifact.clf.k_used == artifact.clf.m3);
}

TEST_CASE("evaluate reports empirical error rates") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3010);
  write_labeled_csv(dir.file("train.csv"), data);
  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--seed", "3", "--out",
             dir.file("model.json")}) == 0);
  std::string out;
  CHECK(run({"evaluate", "--model", dir.file("model.json"), "--data",
             dir.file("train.csv"), "--label-col", "label", "--class0-value",
             "sick", "--out", dir.file("eval.json")},
            &out) == 0);
  CHECK(out.find("type I error") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir.file("eval.json")));
  CHECK(j.at("r0").get<double>() <= 1.0);
  CHECK(j.at("r1").get<double>() <= 1.0);
}

TEST_CASE("model JSON round-trips to identical predictions") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3011);
  write_labeled_csv(dir.file("train.csv"), data);
  for (const char* variant : {"pn2", "nn2"}) {
    CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
               "label", "--class0-value", "sick", "--variant", variant,
               "--seed", "9", "--out", dir.file("m1.json")}) == 0);
    ModelArtifact a = load_model(dir.file("m1.json"));
    a.created_at.clear();  // regenerate timestamp on save
    save_model(dir.file("m2.json"), a);
    const ModelArtifact b = load_model(dir.file("m2.json"));

    Rng rng(99);
    for (int i = 0; i < 50; ++i) {
      Eigen::VectorXd x(10);
      for (int j = 0; j < 10; ++j) x[j] = 3.0 * rng.normal();
      const double s1 = score(a.clf.model, x);
      const double s2 = score(b.clf.model, x);
      CHECK(s1 == s2);
      CHECK((s1 >= a.clf.c_hat) == (s2 >= b.clf.c_hat));
    }
  }
}

TEST_CASE("simulate writes replication and aggregate reports") {
  TempDir dir;
  CHECK(run({"simulate", "--example", "1", "--d", "10", "--m", "60", "--n",
             "60", "--reps", "4", "--test-per-class", "20", "--variant",
             "pn2", "--seed", "2", "--out", dir.file("report")}) == 0);
  const CsvTable reps = read_csv(dir.file("report/replications.csv"));
  CHECK(reps.rows.size() == 4);
  const auto agg =
      nlohmann::json::parse(slurp(dir.file("report/aggregate.json")));
  CHECK(agg.at("reps").get<int>() == 4);
  CHECK(agg.contains("violation_rate"));

  CHECK(run({"simulate", "--example", "1", "--d", "10", "--m", "60", "--n",
             "60", "--reps", "1", "--test-per-class", "5", "--out",
             dir.file("single")}) == 0);
}

TEST_CASE("verify-theory reproduces the reference rows") {
  std::string out;
  CHECK(run({"verify-theory", "--grid-small"}, &out) == 0);
  CHECK(out.find("delta3=0.01: 83") != std::string::npos);
  CHECK(out.find("delta3=0.05: 0") != std::string::npos);
  CHECK(out.find("all checks passed") != std::string::npos);

  // the restricted counting convention does not match the reference table
  CHECK(run({"verify-theory", "--grid-small", "--convention", "nonempty"},
            &out) == 4);
  CHECK(out.find("MISMATCH") != std::string::npos);
}

TEST_CASE("config file defaults lose to explicit flags") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3013);
  write_labeled_csv(dir.file("train.csv"), data);
  {
    std::ofstream f(dir.file("np.toml"));
    f << "[train]\nalpha=0.2\ndelta3=0.3\n";
  }
  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--config",
             dir.file("np.toml"), "--out", dir.file("a.json")}) == 0);
  const ModelArtifact a = load_model(dir.file("a.json"));
  CHECK(a.clf.alpha == 0.2);
  CHECK(a.clf.delta3 == 0.3);

  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--config",
             dir.file("np.toml"), "--alpha", "0.4", "--out",
             dir.file("b.json")}) == 0);
  const ModelArtifact b = load_model(dir.file("b.json"));
  CHECK(b.clf.alpha == 0.4);   // flag beats config
  CHECK(b.clf.delta3 == 0.3);  // config beats default
}

TEST_CASE("predictions CSV round-trips exactly") {
  TempDir dir;
  const LabeledDataset data = example1_train(10, 400, 200, 3012);
  write_labeled_csv(dir.file("train.csv"), data);
  CHECK(run({"train", "--data", dir.file("train.csv"), "--label-col",
             "label", "--class0-value", "sick", "--seed", "1", "--out",
             dir.file("model.json")}) == 0);
  CHECK(run({"predict", "--model", dir.file("model.json"), "--data",
             dir.file("train.csv"), "--out", dir.file("pred.csv")}) == 0);

  const ModelArtifact artifact = load_model(dir.file("model.json"));
  const CsvTable pred = read_csv(dir.file("pred.csv"));
  const Eigen::VectorXd scores = score_all(artifact.clf.model, data.features);
  REQUIRE(pred.rows.size() == static_cast<std::size_t>(scores.size()));
  for (std::size_t r = 0; r < pred.rows.size(); ++r) {
    const double parsed = parse_double(pred.rows[r][1], "score");
    CHECK(parsed == scores[static_cast<Eigen::Index>(r)]);
  }
}
