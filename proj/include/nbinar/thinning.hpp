#ifndef NBINAR_THINNING_HPP
#define NBINAR_THINNING_HPP

#include "nbinar/distributions.hpp"

namespace nbinar {

// Parameters (alpha, mu, r) of the negative binomial INAR(1) model and its
// thinning operator. alpha is the autoregressive coefficient, mu the
// stationary mean and r the negative binomial shape.
struct ModelParams {
  double alpha = 0.5;
  double mu = 1.0;
  double r = 1.0;

  void validate() const;

  // r / (r + (1 - alpha) mu); equals 1 / (1 + (1 - alpha) mu) when r = 1.
  double q_tilde() const { return r / (r + (1.0 - alpha) * mu); }
  double mu_eps() const { return (1.0 - alpha) * mu; }

  NBParams marginal() const { return {r, mu}; }
  NBParams innovation() const { return {r, (1.0 - alpha) * mu}; }
};

// The (beta, theta) parameterization of the same linear-fractional operator,
// with offspring pgf 1 - beta (1 - s) / (1 - (1 - beta) theta s).
struct AltParams {
  double beta = 0.5;
  double theta = 0.5;
  double r = 1.0;

  void validate() const;
};

// Parameters of the h-fold composition of the thinning operator.
struct HFoldParams {
  int h = 1;
  double alpha_h = 0.0;    // alpha^h
  double q_tilde_h = 0.0;  // r / (r + (1 - alpha^h) mu)
  double beta_h = 0.0;
  double theta = 0.0;
};

AltParams star_to_odot(const ModelParams& p);
ModelParams odot_to_star(const AltParams& p);

// Offspring pgf in the (beta, theta) form; beta == 1 is the identity map.
double psi_odot(double beta, double theta, double s);

// Offspring law G of the (alpha, mu, r) operator: zero with probability
// 1 - beta, otherwise shifted geometric with success probability 1 - (1-beta) theta.
double g_pmf(const ModelParams& p, Count k);
// Offspring pgf 1 - alpha (1 - s) / (1 + (1 - alpha) mu (1 - s) / r).
double g_pgf(const ModelParams& p, double s);
CentralMoments g_central_moments(const ModelParams& p);

HFoldParams h_fold(const ModelParams& p, int h);

// P(sum of x iid h-fold offspring = k).
double thin_conditional_pmf(const ModelParams& p, Count x, int h, Count k);

// Draws the thinned count sum_{i=1}^x G_i.
Count thin_sample(const ModelParams& p, Count x, Rng& rng);
// Same, for an operator given directly by (beta, theta); beta == 1 returns x.
Count thin_sample_odot(double beta, double theta, Count x, Rng& rng);

}  // namespace nbinar

#endif  // NBINAR_THINNING_HPP
