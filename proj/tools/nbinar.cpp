#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nbinar/errors.hpp"
#include "nbinar/montecarlo.hpp"
#include "nbinar/process.hpp"
#include "nbinar/report.hpp"
#include "nbinar/selftest.hpp"
#include "nbinar/series_io.hpp"

namespace {

enum Exit { kOk = 0, kSelftestFailed = 1, kParamError = 2, kIoError = 3, kDegenerate = 4 };

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw nbinar::IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw nbinar::ParameterError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// Fills options not given on the command line from a JSON object keyed by
// long flag name without the leading dashes.
void apply_flag_defaults(CLI::App& sub, const std::string& path) {
  const nlohmann::json doc = read_json_file(path);
  if (!doc.is_object()) throw nbinar::ParameterError("flag config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw nbinar::ParameterError("unknown key '" + key + "' in flag config");
    }
    if (opt->count() > 0) continue;
    const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    opt->add_result(text);
    opt->run_callback();
  }
}

struct ParamFlags {
  double alpha = 0.0;
  double mu = 0.0;
  double r = 0.0;

  void attach(CLI::App& sub) {
    sub.add_option("--alpha", alpha, "thinning mean alpha in (0,1)");
    sub.add_option("--mu", mu, "stationary mean mu > 0");
    sub.add_option("--r", r, "shape r > 0");
  }
  nbinar::ModelParams params() const {
    nbinar::ModelParams p{alpha, mu, r};
    p.validate();
    return p;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw nbinar::IoError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw nbinar::IoError("failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Negative binomial INAR(1): simulation, transition laws, estimation, Monte Carlo"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "simulate a stationary series");
  ParamFlags sim_params;
  sim_params.attach(*sim);
  long long sim_n = 0;
  std::uint64_t sim_seed = 0;
  std::string sim_out, sim_config;
  sim->add_option("--n", sim_n, "series length");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "output series file");
  sim->add_option("--config", sim_config, "JSON file of flag defaults");

  auto* tr = app.add_subcommand("transition", "h-step transition probability or table");
  tr->set_help_flag("--help", "print this help message and exit");  // frees -h for the step count
  ParamFlags tr_params;
  tr_params.attach(*tr);
  long long tr_i = -1, tr_j = -1, tr_table = -1;
  int tr_h = 1;
  std::string tr_out, tr_config;
  tr->add_option("--i", tr_i, "origin state");
  tr->add_option("--j", tr_j, "target state");
  tr->add_option("--h", tr_h, "number of steps");
  tr->add_option("--table", tr_table, "write the table on states 0..J");
  tr->add_option("--out", tr_out, "table CSV path (stdout when absent)");
  tr->add_option("--config", tr_config, "JSON file of flag defaults");

  auto* est = app.add_subcommand("estimate", "estimate parameters from a series file");
  std::string est_in, est_method = "cls", est_out, est_config;
  std::optional<double> known_alpha, known_mueps;
  est->add_option("--in", est_in, "series file");
  est->add_option("--method", est_method, "cls | yw | cls-var | cml");
  est->add_option("--known-alpha", known_alpha, "known alpha for cls-var");
  est->add_option("--known-mueps", known_mueps, "known innovation mean for cls-var");
  est->add_option("--out", est_out, "report path (stdout when absent)");
  est->add_option("--config", est_config, "JSON file of flag defaults");

  auto* mc = app.add_subcommand("mc", "run a Monte Carlo experiment");
  std::string mc_config;
  mc->add_option("--config", mc_config, "experiment config (JSON)")->required();

  auto* st = app.add_subcommand("selftest", "run the invariant suites");
  bool inject_fault = false;
  st->add_flag("--inject-fault", inject_fault, "perturb the offspring pgf to prove the harness can fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParamError;
  }

  try {
    if (sim->parsed()) {
      if (!sim_config.empty()) apply_flag_defaults(*sim, sim_config);
      const auto p = sim_params.params();
      if (sim_n < 1) throw nbinar::ParameterError("--n must be positive");
      if (sim_out.empty()) throw nbinar::ParameterError("--out is required");
      nbinar::Rng rng(sim_seed);
      nbinar::Series s = nbinar::simulate(p, static_cast<std::size_t>(sim_n), rng);
      nbinar::write_series(sim_out, s);
      nbinar::write_series_meta(nbinar::meta_path_for(sim_out), nbinar::SeriesMeta{sim_seed, p, "stationary"},
                                s.size());
    } else if (tr->parsed()) {
      if (!tr_config.empty()) apply_flag_defaults(*tr, tr_config);
      const auto p = tr_params.params();
      if (tr_h < 1) throw nbinar::ParameterError("--h must be at least 1");
      if (tr_table >= 0) {
        const auto table = nbinar::transition_table(p, static_cast<nbinar::Count>(tr_table), tr_h);
        if (tr_out.empty()) {
          nbinar::write_table_csv(std::cout, table);
        } else {
          nbinar::write_table_csv(tr_out, table);
        }
      } else {
        if (tr_i < 0 || tr_j < 0) throw nbinar::ParameterError("--i and --j must be non-negative, or use --table");
        std::cout << nbinar::format_probability(nbinar::transition_prob(p, tr_i, tr_j, tr_h)) << '\n';
      }
    } else if (est->parsed()) {
      if (!est_config.empty()) apply_flag_defaults(*est, est_config);
      if (est_in.empty()) throw nbinar::ParameterError("--in is required");
      const auto method = nbinar::parse_estimate_method(est_method);
      if (!method) throw nbinar::ParameterError("unknown method '" + est_method + "'");
      if (known_alpha.has_value() != known_mueps.has_value()) {
        throw nbinar::ParameterError("--known-alpha and --known-mueps go together");
      }
      std::optional<nbinar::KnownMeans> known;
      if (known_alpha) {
        if (*method != nbinar::EstimateMethod::cls_var) {
          throw nbinar::ParameterError("known means apply to cls-var only");
        }
        known = nbinar::KnownMeans{*known_alpha, *known_mueps};
      }
      const nbinar::Series s = nbinar::read_series(est_in);
      const std::string text = nbinar::to_json(nbinar::estimate_series(s, *method, known)).dump(2) + "\n";
      if (est_out.empty()) {
        std::cout << text;
      } else {
        write_text(est_out, text);
      }
    } else if (mc->parsed()) {
      const nbinar::MCConfig cfg = nbinar::parse_mc_config(read_json_file(mc_config));
      const nbinar::MCReport report = nbinar::run_experiment(cfg);
      nbinar::write_raw_csv(nbinar::raw_csv_path(cfg), report);
      nbinar::write_aggregate(nbinar::aggregate_path(cfg), report);
    } else if (st->parsed()) {
      nbinar::SelftestOptions options;
      options.inject_fault = inject_fault;
      const auto result = nbinar::run_selftest(options);
      nbinar::print_selftest(std::cout, result);
      return result.passed() ? kOk : kSelftestFailed;
    }
  } catch (const nbinar::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return kParamError;
  } catch (const nbinar::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const nbinar::DegenerateSeriesError& e) {
    std::cerr << "degenerate series: " << e.what() << '\n';
    return kDegenerate;
  } catch (const CLI::Error& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return kParamError;
  }
  return kOk;
}
