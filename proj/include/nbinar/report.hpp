#ifndef NBINAR_REPORT_HPP
#define NBINAR_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbinar/estimation.hpp"

namespace nbinar {

enum class EstimateMethod { cls, yw, cls_var, cml };

std::string to_string(EstimateMethod m);
std::optional<EstimateMethod> parse_estimate_method(const std::string& text);

struct EstimateReport {
  EstimateMethod method = EstimateMethod::cls;
  std::size_t length = 0;
  std::optional<MeanEstimates> means;
  std::optional<VarianceEstimates> variances;
  std::optional<CmlFit> cml;
  // Parameters at which the plug-in covariances and log-likelihood are evaluated.
  std::optional<ModelParams> plugin;
  std::optional<CovMatrices> cov;
  std::optional<LogLikelihood> loglik;
  std::vector<std::string> flags;
};

// Runs one estimator end to end. Throws DegenerateSeriesError when the data
// cannot support it.
EstimateReport estimate_series(const Series& series, EstimateMethod method,
                               std::optional<KnownMeans> known = std::nullopt);

// Flat key-value document; matrices are row-major arrays, NaN becomes null.
nlohmann::ordered_json to_json(const EstimateReport& report);

}  // namespace nbinar

#endif  // NBINAR_REPORT_HPP
