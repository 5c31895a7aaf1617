#include "nbinar/report.hpp"

#include <cmath>

#include "nbinar/errors.hpp"

namespace nbinar {

namespace {

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json matrix(const Matrix2& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : m.v) arr.push_back(number(v));
  return arr;
}

bool plausible(const ModelParams& p) {
  return p.alpha > 0.0 && p.alpha < 1.0 && p.mu > 0.0 && p.r > 0.0 && std::isfinite(p.mu) && std::isfinite(p.r);
}

}  // namespace

std::string to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::cls: return "cls";
    case EstimateMethod::yw: return "yw";
    case EstimateMethod::cls_var: return "cls-var";
    case EstimateMethod::cml: return "cml";
  }
  return "unknown";
}

std::optional<EstimateMethod> parse_estimate_method(const std::string& text) {
  if (text == "cls") return EstimateMethod::cls;
  if (text == "yw") return EstimateMethod::yw;
  if (text == "cls-var") return EstimateMethod::cls_var;
  if (text == "cml") return EstimateMethod::cml;
  return std::nullopt;
}

EstimateReport estimate_series(const Series& series, EstimateMethod method, std::optional<KnownMeans> known) {
  EstimateReport rep;
  rep.method = method;
  rep.length = series.size();
  const auto& x = series.values;

  if (method == EstimateMethod::cml) {
    if (x.size() < 10) throw DegenerateSeriesError("CML needs at least 10 observations");
    rep.cml = cml_fit(x);
    rep.plugin = rep.cml->params;
    rep.loglik = LogLikelihood{rep.cml->loglik, false};
    if (!rep.cml->converged) rep.flags.emplace_back("cml_not_converged");
    if (rep.cml->fallback_init) rep.flags.emplace_back("cml_fallback_init");
  } else {
    rep.means = method == EstimateMethod::yw ? yw_means(x) : cls_means(x);
    if (!rep.means->in_range) rep.flags.emplace_back("means_out_of_range");
    if (method == EstimateMethod::cls_var && known) {
      rep.variances = cls_variances(x, *known);
    } else {
      rep.variances = cls_variances(x, *rep.means);
    }
    if (!rep.variances->r_defined) rep.flags.emplace_back("r_undefined");
    if (rep.means->in_range && rep.variances->r_defined) {
      rep.plugin = ModelParams{rep.means->alpha_hat, rep.means->mu_hat, rep.variances->r_hat};
    }
  }

  if (rep.plugin && plausible(*rep.plugin)) {
    rep.cov = predicted_cov(*rep.plugin);
    if (!rep.loglik) rep.loglik = loglik(x, *rep.plugin);
    if (rep.loglik->underflow) rep.flags.emplace_back("loglik_underflow");
  } else {
    rep.flags.emplace_back("cov_unavailable");
  }
  return rep;
}

nlohmann::ordered_json to_json(const EstimateReport& rep) {
  nlohmann::ordered_json doc;
  doc["method"] = to_string(rep.method);
  doc["length"] = rep.length;
  if (rep.means) {
    const auto& m = *rep.means;
    doc["mean_method"] = to_string(m.method);
    doc["n"] = m.n;
    doc["alpha_hat"] = number(m.alpha_hat);
    doc["mu_eps_hat"] = number(m.mu_eps_hat);
    doc["mu_hat"] = number(m.mu_hat);
    doc["in_range"] = m.in_range;
  }
  if (rep.variances) {
    const auto& v = *rep.variances;
    doc["residual_mode"] = to_string(v.residual_mode);
    doc["sigma_g2_hat"] = number(v.sigma_g2_hat);
    doc["sigma_eps2_hat"] = number(v.sigma_eps2_hat);
    doc["sigma2_hat"] = number(v.sigma2_hat);
    doc["sigma2_hat_verbatim"] = number(v.sigma2_hat_verbatim);
    doc["r_hat"] = number(v.r_hat);
    doc["r_defined"] = v.r_defined;
  }
  if (rep.cml) {
    const auto& c = *rep.cml;
    doc["alpha_hat"] = number(c.params.alpha);
    doc["mu_hat"] = number(c.params.mu);
    doc["r_hat"] = number(c.params.r);
    doc["mu_eps_hat"] = number(c.params.mu_eps());
    doc["iterations"] = c.iterations;
    doc["evaluations"] = c.evaluations;
    doc["converged"] = c.converged;
    doc["simplex_diameter"] = number(c.simplex_diameter);
    doc["init_alpha"] = number(c.init.alpha);
    doc["init_mu"] = number(c.init.mu);
    doc["init_r"] = number(c.init.r);
  }
  doc["loglik"] = rep.loglik ? number(rep.loglik->value) : nlohmann::json(nullptr);
  if (rep.cov) {
    doc["cov_means"] = matrix(rep.cov->sigma_means);
    doc["cov_alpha_mu"] = matrix(rep.cov->sigma_alpha_mu);
    doc["cov_variances"] = matrix(rep.cov->sigma_vars);
  } else {
    doc["cov_means"] = nullptr;
    doc["cov_alpha_mu"] = nullptr;
    doc["cov_variances"] = nullptr;
  }
  doc["flags"] = rep.flags;
  return doc;
}

}  // namespace nbinar
