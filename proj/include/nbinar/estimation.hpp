#ifndef NBINAR_ESTIMATION_HPP
#define NBINAR_ESTIMATION_HPP

#include <array>
#include <optional>
#include <span>
#include <string>

#include "nbinar/process.hpp"
#include "nbinar/thinning.hpp"

namespace nbinar {

// Sums below follow one convention: for a series of length m, X_0 is the
// first value and t runs over the n = m - 1 transitions.

enum class MeanMethod { cls, yw };
std::string to_string(MeanMethod m);

struct MeanEstimates {
  double alpha_hat = 0.0;
  double mu_eps_hat = 0.0;
  double mu_hat = 0.0;  // mu_eps_hat / (1 - alpha_hat); NaN when alpha_hat == 1
  MeanMethod method = MeanMethod::cls;
  std::size_t n = 0;       // transitions for CLS, observations for YW
  bool in_range = false;   // alpha_hat in (0, 1) and mu_eps_hat > 0
};

struct KnownMeans {
  double alpha = 0.0;
  double mu_eps = 0.0;
};

enum class ResidualMode { estimated_means, known_means };
std::string to_string(ResidualMode m);

struct VarianceEstimates {
  double sigma_g2_hat = 0.0;
  double sigma_eps2_hat = 0.0;
  // (mu sigma_G^2 + sigma_eps^2) / (1 - alpha^2), the stationary-variance relation.
  double sigma2_hat = 0.0;
  // The closed form as commonly displayed: with estimated means,
  // (mu_eps sG2 + (1-alpha) sE2) / ((1-alpha)^2 (1+alpha)); with known means,
  // (mu sG2 + sE2) / (1-alpha)^2.
  double sigma2_hat_verbatim = 0.0;
  double r_hat = 0.0;      // mu_eps^2 / (sigma_eps^2 - mu_eps); NaN unless overdispersed
  bool r_defined = false;
  ResidualMode residual_mode = ResidualMode::estimated_means;
};

// Row-major 2x2 matrix.
struct Matrix2 {
  std::array<double, 4> v{};

  double operator()(int i, int j) const { return v[static_cast<std::size_t>(2 * i + j)]; }
  double& operator()(int i, int j) { return v[static_cast<std::size_t>(2 * i + j)]; }

  Matrix2 transpose() const { return {{v[0], v[2], v[1], v[3]}}; }
  Matrix2 inverse() const;
  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b);
};

struct CovMatrices {
  Matrix2 sigma_means;     // sqrt(n) (alpha_hat, mu_eps_hat)
  Matrix2 sigma_alpha_mu;  // sqrt(n) (alpha_hat, mu_hat), J Sigma J'
  Matrix2 sigma_vars;      // sqrt(n) (sigma_G2_hat, sigma_eps2_hat)
};

// Constant term of the conditional variance of U_t^2 given X_{t-1}.
// `derived` is mu4(eps) - sigma_eps^4; `as_displayed` is mu4(G) - mu4(eps).
enum class VarianceKernelConstant { derived, as_displayed };

struct LogLikelihood {
  double value = 0.0;
  bool underflow = false;  // some transition probability was 0 in double precision
};

struct CmlFit {
  ModelParams params;
  double loglik = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  double simplex_diameter = 0.0;
  bool fallback_init = false;
  ModelParams init;
};

// Conditional sum of squares sum_t (X_t - alpha X_{t-1} - mu_eps)^2.
double cls_objective(std::span<const Count> x, double alpha, double mu_eps);
// sum_t (U_t^2 - sigma_g2 X_{t-1} - sigma_eps2)^2 with U_t = X_t - alpha X_{t-1} - mu_eps.
double variance_objective(std::span<const Count> x, double alpha, double mu_eps, double sigma_g2, double sigma_eps2);

MeanEstimates cls_means(std::span<const Count> x);
MeanEstimates yw_means(std::span<const Count> x);
VarianceEstimates cls_variances(std::span<const Count> x, const MeanEstimates& means);
VarianceEstimates cls_variances(std::span<const Count> x, const KnownMeans& known);

inline MeanEstimates cls_means(const Series& s) { return cls_means(s.values); }
inline MeanEstimates yw_means(const Series& s) { return yw_means(s.values); }

CovMatrices predicted_cov(const ModelParams& p,
                          VarianceKernelConstant constant = VarianceKernelConstant::derived);

// Conditional log-likelihood given X_0.
LogLikelihood loglik(std::span<const Count> x, const ModelParams& p);
inline LogLikelihood loglik(const Series& s, const ModelParams& p) { return loglik(s.values, p); }

inline constexpr int kCmlMaxIterations = 500;
inline constexpr double kCmlDiameterTol = 1e-6;

// Maximizes the conditional log-likelihood over (logit alpha, log mu, log r)
// with a Nelder-Mead simplex. Without init, starts from the Yule-Walker means
// and the moment estimator of r.
CmlFit cml_fit(std::span<const Count> x, std::optional<ModelParams> init = std::nullopt);

// Starting point cml_fit uses when no init is given; sets fallback when the
// data-driven start is degenerate.
ModelParams cml_default_init(std::span<const Count> x, bool* fallback = nullptr);

}  // namespace nbinar

#endif  // NBINAR_ESTIMATION_HPP
