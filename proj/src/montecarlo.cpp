#include "nbinar/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "nbinar/errors.hpp"
#include "nbinar/process.hpp"
#include "nbinar/series_io.hpp"

namespace nbinar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::string> coordinate_names(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::cls:
    case EstimateMethod::yw: return {"alpha_hat", "mu_eps_hat"};
    case EstimateMethod::cls_var: return {"sigma_g2_hat", "sigma_eps2_hat"};
    case EstimateMethod::cml: return {"alpha_hat", "mu_hat", "r_hat"};
  }
  return {};
}

std::vector<double> coordinates(const ReplicateRow& row) {
  switch (row.estimator) {
    case EstimateMethod::cls:
    case EstimateMethod::yw: return {row.alpha_hat, row.mu_eps_hat};
    case EstimateMethod::cls_var: return {row.sigma_g2_hat, row.sigma_eps2_hat};
    case EstimateMethod::cml: return {row.alpha_hat, row.mu_hat, row.r_hat};
  }
  return {};
}

std::vector<double> truth_for(EstimateMethod m, const ModelParams& p) {
  switch (m) {
    case EstimateMethod::cls:
    case EstimateMethod::yw: return {p.alpha, p.mu_eps()};
    case EstimateMethod::cls_var:
      return {g_central_moments(p).m2, nb_central_moments(p.innovation()).m2};
    case EstimateMethod::cml: return {p.alpha, p.mu, p.r};
  }
  return {};
}

std::optional<Matrix2> prediction_for(EstimateMethod m, const CovMatrices& cov) {
  switch (m) {
    case EstimateMethod::cls:
    case EstimateMethod::yw: return cov.sigma_means;
    case EstimateMethod::cls_var: return cov.sigma_vars;
    case EstimateMethod::cml: return std::nullopt;
  }
  return std::nullopt;
}

ReplicateRow run_estimator(EstimateMethod m, const Series& series) {
  ReplicateRow row;
  row.estimator = m;
  row.alpha_hat = row.mu_eps_hat = row.mu_hat = kNaN;
  row.sigma_g2_hat = row.sigma_eps2_hat = row.r_hat = kNaN;
  try {
    const EstimateReport rep = [&] {
      // The plug-in covariance and likelihood are not needed per replicate.
      EstimateReport r;
      r.method = m;
      if (m == EstimateMethod::cml) {
        r.cml = cml_fit(series.values);
        if (!r.cml->converged) r.flags.emplace_back("cml_not_converged");
        if (r.cml->fallback_init) r.flags.emplace_back("cml_fallback_init");
      } else {
        r.means = m == EstimateMethod::yw ? yw_means(series) : cls_means(series);
        if (!r.means->in_range) r.flags.emplace_back("means_out_of_range");
        r.variances = cls_variances(series.values, *r.means);
        if (!r.variances->r_defined) r.flags.emplace_back("r_undefined");
      }
      return r;
    }();
    if (rep.cml) {
      row.alpha_hat = rep.cml->params.alpha;
      row.mu_hat = rep.cml->params.mu;
      row.r_hat = rep.cml->params.r;
      row.mu_eps_hat = rep.cml->params.mu_eps();
    } else {
      row.alpha_hat = rep.means->alpha_hat;
      row.mu_eps_hat = rep.means->mu_eps_hat;
      row.mu_hat = rep.means->mu_hat;
      row.sigma_g2_hat = rep.variances->sigma_g2_hat;
      row.sigma_eps2_hat = rep.variances->sigma_eps2_hat;
      row.r_hat = rep.variances->r_hat;
    }
    row.flags = rep.flags;
  } catch (const DegenerateSeriesError&) {
    row.failed = true;
    row.flags = {"degenerate"};
  }
  return row;
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json json_vector(const std::vector<double>& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (double x : v) arr.push_back(json_number(x));
  return arr;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

void MCConfig::validate() const {
  params.validate();
  if (replicates < 2) throw ParameterError("replicates must be at least 2");
  if (n_grid.empty()) throw ParameterError("n_grid must not be empty");
  for (int n : n_grid) {
    if (n < 10) throw ParameterError("n_grid entries must be at least 10");
  }
  if (estimators.empty()) throw ParameterError("estimators must not be empty");
  if (threads < 0) throw ParameterError("threads must be non-negative");
}

MCConfig parse_mc_config(const nlohmann::json& doc) {
  MCConfig cfg;
  try {
    if (!doc.is_object()) throw ParameterError("config must be a JSON object");
    const auto& p = doc.at("params");
    cfg.params = {p.at("alpha").get<double>(), p.at("mu").get<double>(), p.at("r").get<double>()};
    cfg.n_grid = doc.at("n_grid").get<std::vector<int>>();
    cfg.replicates = doc.at("replicates").get<int>();
    for (const auto& tag : doc.at("estimators")) {
      const auto m = parse_estimate_method(tag.get<std::string>());
      if (!m) throw ParameterError("unknown estimator '" + tag.get<std::string>() + "'");
      if (std::find(cfg.estimators.begin(), cfg.estimators.end(), *m) == cfg.estimators.end()) {
        cfg.estimators.push_back(*m);
      }
    }
    cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
    cfg.output_path = doc.at("output_path").get<std::string>();
    if (doc.contains("threads")) cfg.threads = doc.at("threads").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("invalid Monte Carlo config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string raw_csv_path(const MCConfig& cfg) { return cfg.output_path + "_raw.csv"; }
std::string aggregate_path(const MCConfig& cfg) { return cfg.output_path + "_aggregate.json"; }

double quantile(std::vector<double> sample, double prob) {
  if (sample.empty()) return kNaN;
  std::sort(sample.begin(), sample.end());
  const double pos = prob * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

Summary summarize(const std::vector<std::vector<double>>& values, const std::vector<double>& truth, double scale) {
  if (values.size() < 2) throw DegenerateSeriesError("summary needs at least two successful replicates");
  const std::size_t k = truth.size();
  const double count = static_cast<double>(values.size());
  Summary s;
  s.count = values.size();
  s.mean.assign(k, 0.0);
  for (const auto& v : values) {
    for (std::size_t i = 0; i < k; ++i) s.mean[i] += v[i] / count;
  }
  s.bias.resize(k);
  for (std::size_t i = 0; i < k; ++i) s.bias[i] = s.mean[i] - truth[i];

  // Centering at the sample mean, so the truth shift drops out of the covariance.
  s.cov.assign(k * k, 0.0);
  for (const auto& v : values) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) s.cov[i * k + j] += (v[i] - s.mean[i]) * (v[j] - s.mean[j]);
    }
  }
  for (double& c : s.cov) c *= scale / (count - 1.0);

  s.quantiles.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> col;
    col.reserve(values.size());
    for (const auto& v : values) col.push_back(v[i]);
    s.quantiles[i] = {quantile(col, 0.25), quantile(col, 0.5), quantile(col, 0.75)};
  }
  return s;
}

std::uint64_t stream_seed(std::uint64_t master, int n, int replicate) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(n)));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(replicate)) << 1));
  return h;
}

int resolve_threads(int requested) {
  int threads = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NBINAR_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) threads = std::min(threads > 0 ? threads : cap, cap);
  }
  return std::max(threads, 1);
}

const AggregateBlock* MCReport::find(EstimateMethod est, int n) const {
  for (const auto& block : aggregates) {
    if (block.estimator == est && block.n == n) return &block;
  }
  return nullptr;
}

MCReport run_experiment(const MCConfig& cfg) {
  cfg.validate();
  const std::size_t n_est = cfg.estimators.size();
  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  const std::size_t tasks = cfg.n_grid.size() * reps;

  // rows[(grid index * reps + replicate) * n_est + estimator index]
  std::vector<ReplicateRow> rows(tasks * n_est);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      const std::size_t g = task / reps;
      const int rep = static_cast<int>(task % reps);
      const int n = cfg.n_grid[g];
      Rng rng(stream_seed(cfg.master_seed, n, rep));
      const Series series = simulate(cfg.params, static_cast<std::size_t>(n), rng);
      for (std::size_t e = 0; e < n_est; ++e) {
        ReplicateRow row = run_estimator(cfg.estimators[e], series);
        row.n = n;
        row.replicate = rep;
        rows[task * n_est + e] = std::move(row);
      }
    }
  };
  const int threads = std::min<int>(resolve_threads(cfg.threads), static_cast<int>(std::max<std::size_t>(tasks, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  MCReport report;
  report.config = cfg;
  const CovMatrices predicted = predicted_cov(cfg.params);
  for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
    const int n = cfg.n_grid[g];
    for (std::size_t e = 0; e < n_est; ++e) {
      AggregateBlock block;
      block.estimator = cfg.estimators[e];
      block.n = n;
      block.coordinates = coordinate_names(block.estimator);
      block.truth = truth_for(block.estimator, cfg.params);
      std::vector<std::vector<double>> values;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const ReplicateRow& row = rows[(g * reps + rep) * n_est + e];
        const auto coords = coordinates(row);
        const bool finite = std::all_of(coords.begin(), coords.end(), [](double v) { return std::isfinite(v); });
        if (row.failed || !finite) {
          ++block.excluded;
        } else {
          values.push_back(coords);
        }
      }
      block.successful = values.size();
      if (values.size() >= 2) {
        block.summary = summarize(values, block.truth, static_cast<double>(n));
        if (const auto pred = prediction_for(block.estimator, predicted)) {
          block.predicted_cov = std::vector<double>(pred->v.begin(), pred->v.end());
          std::vector<double> dev(4);
          for (std::size_t i = 0; i < 4; ++i) {
            dev[i] = std::abs(block.summary.cov[i] - pred->v[i]) / std::abs(pred->v[i]);
          }
          block.max_relative_deviation = *std::max_element(dev.begin(), dev.end());
          block.relative_deviation = std::move(dev);
        }
      }
      report.aggregates.push_back(std::move(block));
    }

    const auto cls_it = std::find(cfg.estimators.begin(), cfg.estimators.end(), EstimateMethod::cls);
    const auto yw_it = std::find(cfg.estimators.begin(), cfg.estimators.end(), EstimateMethod::yw);
    if (cls_it != cfg.estimators.end() && yw_it != cfg.estimators.end()) {
      const auto ci = static_cast<std::size_t>(cls_it - cfg.estimators.begin());
      const auto yi = static_cast<std::size_t>(yw_it - cfg.estimators.begin());
      std::vector<double> gaps;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const ReplicateRow& c = rows[(g * reps + rep) * n_est + ci];
        const ReplicateRow& y = rows[(g * reps + rep) * n_est + yi];
        if (c.failed || y.failed) continue;
        gaps.push_back(std::sqrt(static_cast<double>(n)) * std::abs(y.alpha_hat - c.alpha_hat));
      }
      GapBlock gap;
      gap.n = n;
      gap.count = gaps.size();
      if (!gaps.empty()) {
        double sum = 0.0;
        for (double v : gaps) sum += v;
        gap.mean = sum / static_cast<double>(gaps.size());
        gap.quantiles = {quantile(gaps, 0.25), quantile(gaps, 0.5), quantile(gaps, 0.75)};
      }
      report.yw_cls_gap.push_back(gap);
    }
  }
  report.rows = std::move(rows);
  return report;
}

void write_raw_csv(const std::string& path, const MCReport& report) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "estimator,n,replicate,alpha_hat,mu_eps_hat,mu_hat,sigma_g2_hat,sigma_eps2_hat,r_hat,flags\n";
  for (const auto& row : report.rows) {
    os << to_string(row.estimator) << ',' << row.n << ',' << row.replicate << ',' << csv_number(row.alpha_hat) << ','
       << csv_number(row.mu_eps_hat) << ',' << csv_number(row.mu_hat) << ',' << csv_number(row.sigma_g2_hat) << ','
       << csv_number(row.sigma_eps2_hat) << ',' << csv_number(row.r_hat) << ',' << join(row.flags, ';') << '\n';
  }
  if (!os) throw IoError("failed writing '" + path + "'");
}

nlohmann::ordered_json to_json(const MCReport& report) {
  const MCConfig& cfg = report.config;
  nlohmann::ordered_json doc;
  doc["params"] = {{"alpha", cfg.params.alpha}, {"mu", cfg.params.mu}, {"r", cfg.params.r}};
  doc["n_grid"] = cfg.n_grid;
  doc["replicates"] = cfg.replicates;
  std::vector<std::string> tags;
  for (auto e : cfg.estimators) tags.push_back(to_string(e));
  doc["estimators"] = tags;
  doc["master_seed"] = cfg.master_seed;

  nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
  for (const auto& b : report.aggregates) {
    nlohmann::ordered_json j;
    j["estimator"] = to_string(b.estimator);
    j["n"] = b.n;
    j["coordinates"] = b.coordinates;
    j["truth"] = json_vector(b.truth);
    j["successful"] = b.successful;
    j["excluded"] = b.excluded;
    if (b.successful >= 2) {
      j["mean"] = json_vector(b.summary.mean);
      j["bias"] = json_vector(b.summary.bias);
      j["empirical_cov_sqrt_n"] = json_vector(b.summary.cov);
      nlohmann::json q = nlohmann::json::array();
      for (const auto& qs : b.summary.quantiles) q.push_back({json_number(qs[0]), json_number(qs[1]), json_number(qs[2])});
      j["quantiles_25_50_75"] = q;
    }
    j["predicted_cov"] = b.predicted_cov ? json_vector(*b.predicted_cov) : nlohmann::json(nullptr);
    j["relative_deviation"] = b.relative_deviation ? json_vector(*b.relative_deviation) : nlohmann::json(nullptr);
    j["max_relative_deviation"] = b.relative_deviation ? json_number(b.max_relative_deviation) : nlohmann::json(nullptr);
    blocks.push_back(j);
  }
  doc["aggregates"] = blocks;

  nlohmann::ordered_json gaps = nlohmann::ordered_json::array();
  for (const auto& g : report.yw_cls_gap) {
    gaps.push_back({{"n", g.n},
                    {"count", g.count},
                    {"mean", json_number(g.mean)},
                    {"quantiles_25_50_75", {json_number(g.quantiles[0]), json_number(g.quantiles[1]),
                                            json_number(g.quantiles[2])}}});
  }
  doc["yw_cls_sqrt_n_gap"] = gaps;
  return doc;
}

void write_aggregate(const std::string& path, const MCReport& report) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << to_json(report).dump(2) << '\n';
  if (!os) throw IoError("failed writing '" + path + "'");
}

}  // namespace nbinar
