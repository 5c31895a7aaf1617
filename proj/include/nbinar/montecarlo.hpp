#ifndef NBINAR_MONTECARLO_HPP
#define NBINAR_MONTECARLO_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbinar/report.hpp"
#include "nbinar/thinning.hpp"

namespace nbinar {

struct MCConfig {
  ModelParams params;
  std::vector<int> n_grid;
  int replicates = 2;
  std::vector<EstimateMethod> estimators;
  std::uint64_t master_seed = 0;
  std::string output_path;  // prefix; see raw_csv_path / aggregate_path
  int threads = 0;          // 0 = auto; NBINAR_THREADS caps this

  void validate() const;
};

// Throws ParameterError on schema violations.
MCConfig parse_mc_config(const nlohmann::json& doc);

std::string raw_csv_path(const MCConfig& cfg);
std::string aggregate_path(const MCConfig& cfg);

struct ReplicateRow {
  EstimateMethod estimator = EstimateMethod::cls;
  int n = 0;
  int replicate = 0;
  double alpha_hat = 0.0;
  double mu_eps_hat = 0.0;
  double mu_hat = 0.0;
  double sigma_g2_hat = 0.0;
  double sigma_eps2_hat = 0.0;
  double r_hat = 0.0;
  std::vector<std::string> flags;
  bool failed = false;
};

// Aggregate statistics of one coordinate vector over replicates.
struct Summary {
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<double> bias;                      // mean - truth
  std::vector<double> cov;                       // row-major, 1/(R-1), of sqrt(scale) * (est - truth)
  std::vector<std::array<double, 3>> quantiles;  // 0.25, 0.5, 0.75 per coordinate
};

// values[r] is replicate r's coordinate vector. Throws DegenerateSeriesError
// when fewer than two replicates are present.
Summary summarize(const std::vector<std::vector<double>>& values, const std::vector<double>& truth, double scale);

// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> sample, double prob);

struct AggregateBlock {
  EstimateMethod estimator = EstimateMethod::cls;
  int n = 0;
  std::vector<std::string> coordinates;
  std::vector<double> truth;
  std::size_t successful = 0;
  std::size_t excluded = 0;
  Summary summary;
  std::optional<std::vector<double>> predicted_cov;  // row-major
  std::optional<std::vector<double>> relative_deviation;
  double max_relative_deviation = 0.0;
};

// sqrt(n) |alpha_yw - alpha_cls| over replicates where both succeeded.
struct GapBlock {
  int n = 0;
  std::size_t count = 0;
  double mean = 0.0;
  std::array<double, 3> quantiles{};
};

struct MCReport {
  MCConfig config;
  std::vector<ReplicateRow> rows;
  std::vector<AggregateBlock> aggregates;
  std::vector<GapBlock> yw_cls_gap;

  const AggregateBlock* find(EstimateMethod est, int n) const;
};

// Per-replicate stream seed derived from (master, n, replicate).
std::uint64_t stream_seed(std::uint64_t master, int n, int replicate);

// Effective worker count: the config value (0 = hardware), capped by NBINAR_THREADS when set.
int resolve_threads(int requested);

// Deterministic in the config regardless of thread count. Does not write files.
MCReport run_experiment(const MCConfig& cfg);

void write_raw_csv(const std::string& path, const MCReport& report);
nlohmann::ordered_json to_json(const MCReport& report);
void write_aggregate(const std::string& path, const MCReport& report);

}  // namespace nbinar

#endif  // NBINAR_MONTECARLO_HPP
