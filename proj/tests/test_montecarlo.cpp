#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "nbinar/errors.hpp"
#include "nbinar/montecarlo.hpp"

using namespace nbinar;

namespace {

MCConfig small_config(const std::string& out) {
  MCConfig cfg;
  cfg.params = {0.5, 2.0, 1.0};
  cfg.n_grid = {50, 80};
  cfg.replicates = 3;
  cfg.estimators = {EstimateMethod::cls, EstimateMethod::yw, EstimateMethod::cls_var, EstimateMethod::cml};
  cfg.master_seed = 42;
  cfg.output_path = out;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("summarize") {
  const Summary same = summarize({{1.0, 2.0}, {1.0, 2.0}}, {0.0, 0.0}, 1.0);
  for (double c : same.cov) CHECK(c == 0.0);

  const Summary s = summarize({{1.0, 1.0}, {3.0, 3.0}}, {2.0, 2.0}, 1.0);
  CHECK(s.count == 2);
  CHECK(s.bias[0] == 0.0);
  CHECK(s.bias[1] == 0.0);
  for (double c : s.cov) CHECK(c == doctest::Approx(2.0));

  const Summary scaled = summarize({{1.0, 1.0}, {3.0, 3.0}}, {2.0, 2.0}, 10.0);
  CHECK(scaled.cov[0] == doctest::Approx(20.0));

  CHECK_THROWS_AS(summarize({{1.0}}, {0.0}, 1.0), DegenerateSeriesError);
}

TEST_CASE("quantile") {
  CHECK(quantile({4.0}, 0.25) == 4.0);
  CHECK(quantile({4.0}, 0.75) == 4.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("config parsing") {
  const auto doc = nlohmann::json::parse(R"({
    "params": {"alpha": 0.5, "mu": 2, "r": 1},
    "n_grid": [50], "replicates": 2, "estimators": ["cls", "cls-var"],
    "master_seed": 3, "output_path": "x"})");
  const MCConfig cfg = parse_mc_config(doc);
  CHECK(cfg.estimators.size() == 2);
  CHECK(raw_csv_path(cfg) == "x_raw.csv");
  CHECK(aggregate_path(cfg) == "x_aggregate.json");

  auto bad = doc;
  bad["estimators"] = {"mle"};
  CHECK_THROWS_AS(parse_mc_config(bad), ParameterError);
  bad = doc;
  bad["replicates"] = 1;
  CHECK_THROWS_AS(parse_mc_config(bad), ParameterError);
  bad = doc;
  bad["params"]["alpha"] = 1.2;
  CHECK_THROWS_AS(parse_mc_config(bad), ParameterError);
  bad = doc;
  bad.erase("n_grid");
  CHECK_THROWS_AS(parse_mc_config(bad), ParameterError);
  CHECK_THROWS_AS(parse_mc_config(nlohmann::json::array()), ParameterError);
}

TEST_CASE("stream seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (int n : {50, 500, 5000})
    for (int r = 0; r < 200; ++r) seen.insert(stream_seed(7, n, r));
  CHECK(seen.size() == 600);
  CHECK(stream_seed(7, 50, 0) != stream_seed(8, 50, 0));
}

TEST_CASE("thread cap from the environment") {
  ::setenv("NBINAR_THREADS", "2", 1);
  CHECK(resolve_threads(8) == 2);
  CHECK(resolve_threads(1) == 1);
  ::unsetenv("NBINAR_THREADS");
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("run_experiment bookkeeping and determinism") {
  const auto dir = std::filesystem::temp_directory_path() / "nbinar_mc_test";
  std::filesystem::create_directories(dir);
  MCConfig cfg = small_config((dir / "a").string());
  cfg.threads = 1;
  const MCReport one = run_experiment(cfg);
  CHECK(one.rows.size() == 4 * 2 * 3);
  for (auto est : cfg.estimators) {
    for (int n : cfg.n_grid) {
      int count = 0;
      for (const auto& row : one.rows) count += row.estimator == est && row.n == n;
      CHECK(count == 3);
      const AggregateBlock* b = one.find(est, n);
      REQUIRE(b != nullptr);
      CHECK(b->successful + b->excluded == 3);
    }
  }
  CHECK(one.find(EstimateMethod::cls, 50)->predicted_cov.has_value());
  CHECK(one.find(EstimateMethod::cls_var, 50)->predicted_cov.has_value());
  CHECK_FALSE(one.find(EstimateMethod::cml, 50)->predicted_cov.has_value());
  CHECK(one.yw_cls_gap.size() == 2);

  cfg.threads = 3;
  const MCReport three = run_experiment(cfg);
  REQUIRE(three.rows.size() == one.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].alpha_hat == three.rows[i].alpha_hat);
    const bool same_r = one.rows[i].r_hat == three.rows[i].r_hat ||
                        (std::isnan(one.rows[i].r_hat) && std::isnan(three.rows[i].r_hat));
    CHECK(same_r);
  }

  write_raw_csv(raw_csv_path(cfg), one);
  write_aggregate(aggregate_path(cfg), one);
  const std::string csv = slurp(raw_csv_path(cfg));
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 1 + one.rows.size());
  const auto agg = nlohmann::json::parse(slurp(aggregate_path(cfg)));
  CHECK(agg["aggregates"].size() == 8);

  write_aggregate(aggregate_path(cfg) + ".again", three);
  CHECK(slurp(aggregate_path(cfg)) == slurp(aggregate_path(cfg) + ".again"));

  CHECK_THROWS_AS(write_raw_csv((dir / "missing" / "x.csv").string(), one), IoError);
  std::filesystem::remove_all(dir);
}
