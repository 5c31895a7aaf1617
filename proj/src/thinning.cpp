#include "nbinar/thinning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nbinar/errors.hpp"

namespace nbinar {

void ModelParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream os;
    os << "alpha must lie in (0, 1), got " << alpha;
    throw ParameterError(os.str());
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    std::ostringstream os;
    os << "mu must be positive and finite, got " << mu;
    throw ParameterError(os.str());
  }
  if (!(r > 0.0) || !std::isfinite(r)) {
    std::ostringstream os;
    os << "r must be positive and finite, got " << r;
    throw ParameterError(os.str());
  }
}

void AltParams::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0, 1)");
  if (!(theta >= 0.0 && theta < 1.0)) throw ParameterError("theta must lie in [0, 1)");
  if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("r must be positive and finite");
}

AltParams star_to_odot(const ModelParams& p) {
  p.validate();
  const double denom = p.r + (1.0 - p.alpha) * p.mu;
  return {p.alpha * p.r / denom, p.mu / (p.mu + p.r), p.r};
}

ModelParams odot_to_star(const AltParams& p) {
  p.validate();
  const double theta_bar = 1.0 - p.theta;
  return {p.beta / (1.0 - (1.0 - p.beta) * p.theta), p.theta * p.r / theta_bar, p.r};
}

double psi_odot(double beta, double theta, double s) {
  return 1.0 - beta * (1.0 - s) / (1.0 - (1.0 - beta) * theta * s);
}

double g_pmf(const ModelParams& p, Count k) {
  if (k < 0) return 0.0;
  const AltParams alt = star_to_odot(p);
  const double beta = alt.beta;
  if (k == 0) return 1.0 - beta;
  const double stay = (1.0 - beta) * alt.theta;
  return beta * (1.0 - stay) * std::pow(stay, static_cast<double>(k - 1));
}

double g_pgf(const ModelParams& p, double s) {
  p.validate();
  if (!(s >= 0.0 && s <= 1.0)) throw ParameterError("pgf argument s must lie in [0, 1]");
  return 1.0 - p.alpha * (1.0 - s) / (1.0 + (1.0 - p.alpha) * p.mu * (1.0 - s) / p.r);
}

CentralMoments g_central_moments(const ModelParams& p) {
  const AltParams alt = star_to_odot(p);
  const double beta = alt.beta;
  const double q = 1.0 - (1.0 - beta) * alt.theta;

  // Raw moments of the shifted geometric on {1, 2, ...} with success probability q.
  const double s1 = 1.0 / q;
  const double s2 = (2.0 - q) / (q * q);
  const double s3 = (6.0 - 6.0 * q + q * q) / (q * q * q);
  const double s4 = (24.0 - 36.0 * q + 14.0 * q * q - q * q * q) / (q * q * q * q);

  const double e1 = beta * s1;
  const double e2 = beta * s2;
  const double e3 = beta * s3;
  const double e4 = beta * s4;

  CentralMoments m;
  m.mean = p.alpha;
  // The closed form is exact and avoids cancellation in e2 - e1^2.
  m.m2 = p.alpha * (1.0 - p.alpha) * (2.0 * p.mu / p.r + 1.0);
  m.m3 = e3 - 3.0 * e1 * e2 + 2.0 * e1 * e1 * e1;
  m.m4 = e4 - 4.0 * e1 * e3 + 6.0 * e1 * e1 * e2 - 3.0 * e1 * e1 * e1 * e1;
  return m;
}

HFoldParams h_fold(const ModelParams& p, int h) {
  if (h < 1) throw ParameterError("h-fold order must be at least 1");
  const AltParams alt = star_to_odot(p);
  const double beta = alt.beta;
  const double theta = alt.theta;
  const double stay = (1.0 - beta) * theta;

  HFoldParams out;
  out.h = h;
  out.theta = theta;
  const double log_alpha_h = h * std::log(p.alpha);
  out.alpha_h = std::exp(log_alpha_h);
  out.q_tilde_h = p.r / (p.r - std::expm1(log_alpha_h) * p.mu);

  // beta / (1 - (1-beta) theta) is alpha, so the ratio below is alpha^h.
  const double log_ratio_h = h * (std::log(beta) - std::log1p(-stay));
  if (log_ratio_h < -30.0) {
    out.beta_h = out.alpha_h * out.q_tilde_h;
  } else {
    const double log_denom = h * std::log1p(-stay) + std::log1p(-theta * std::exp(log_ratio_h));
    out.beta_h = std::exp(h * std::log(beta) + std::log1p(-theta) - log_denom);
  }
  return out;
}

double thin_conditional_pmf(const ModelParams& p, Count x, int h, Count k) {
  if (x < 0) throw ParameterError("thinned count x must be non-negative");
  if (k < 0) return 0.0;
  if (x == 0) return k == 0 ? 1.0 : 0.0;
  const HFoldParams hf = h_fold(p, h);
  const double beta_h = hf.beta_h;
  if (k == 0) return std::pow(1.0 - beta_h, static_cast<double>(x));
  const double y = 1.0 - (1.0 - beta_h) * hf.theta;
  double sum = 0.0;
  const Count top = std::min(k, x);
  for (Count i = 1; i <= top; ++i) {
    const double term = coeff_A(x, i, beta_h) * coeff_B(static_cast<double>(k), static_cast<double>(i), y);
    if (term > 1e-300) sum += term;
  }
  return sum;
}

Count thin_sample_odot(double beta, double theta, Count x, Rng& rng) {
  if (x <= 0) return 0;
  if (beta >= 1.0) return x;
  std::binomial_distribution<Count> contributors(x, beta);
  const Count n = contributors(rng);
  if (n == 0) return 0;
  const double q = 1.0 - (1.0 - beta) * theta;
  if (q >= 1.0) return n;
  std::negative_binomial_distribution<Count> extra(n, q);
  return n + extra(rng);
}

Count thin_sample(const ModelParams& p, Count x, Rng& rng) {
  if (x < 0) throw ParameterError("thinned count x must be non-negative");
  const AltParams alt = star_to_odot(p);
  return thin_sample_odot(alt.beta, alt.theta, x, rng);
}

}  // namespace nbinar
