#include "nbinar/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "nbinar/errors.hpp"

namespace nbinar {

namespace {

void require_unit_interval(double y, const char* what) {
  if (!(y >= 0.0 && y <= 1.0)) {
    std::ostringstream os;
    os << what << " must lie in [0, 1], got " << y;
    throw ParameterError(os.str());
  }
}

}  // namespace

void NBParams::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw ParameterError("negative binomial shape r must be positive and finite");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ParameterError("negative binomial mean mu must be positive and finite");
  }
}

void ShiftedGeomParams::validate() const {
  if (!(p > 0.0 && p < 1.0)) {
    throw ParameterError("shifted geometric p must lie in (0, 1)");
  }
}

// glibc's lgamma is accurate to a few ulp on the positive axis, which is
// well inside the 1e-13 relative budget required on [0.1, 500].
double log_gamma(double x) {
  if (!(x > 0.0)) throw ParameterError("log_gamma requires a positive argument");
  return std::lgamma(x);
}

double nb_log_pmf(const NBParams& params, Count k) {
  params.validate();
  if (k < 0) return -std::numeric_limits<double>::infinity();
  const double r = params.r;
  const double kd = static_cast<double>(k);
  // log theta = log mu - log(mu + r), log(1 - theta) = log r - log(mu + r)
  const double log_sum = std::log(params.mu + r);
  const double log_theta = std::log(params.mu) - log_sum;
  const double log_theta_bar = std::log(r) - log_sum;
  return std::lgamma(kd + r) - std::lgamma(kd + 1.0) - std::lgamma(r) + r * log_theta_bar +
         kd * log_theta;
}

double nb_pmf(const NBParams& params, Count k) { return std::exp(nb_log_pmf(params, k)); }

double nb_pgf(const NBParams& params, double s) {
  params.validate();
  require_unit_interval(s, "pgf argument s");
  return std::pow(1.0 + params.mu / params.r * (1.0 - s), -params.r);
}

Count nb_sample(const NBParams& params, Rng& rng) {
  params.validate();
  std::gamma_distribution<double> gamma(params.r, params.mu / params.r);
  const double lambda = gamma(rng);
  if (!(lambda > 0.0)) return 0;
  std::poisson_distribution<Count> poisson(lambda);
  return poisson(rng);
}

CentralMoments nb_central_moments(const NBParams& params) {
  params.validate();
  const double mu = params.mu;
  const double r = params.r;
  const double var = mu * (mu / r + 1.0);
  CentralMoments m;
  m.mean = mu;
  m.m2 = var;
  m.m3 = var * (2.0 * mu / r + 1.0);
  m.m4 = var * (1.0 + 3.0 * var * (1.0 + 2.0 / r));
  return m;
}

double nb_tail_bound(const NBParams& params, Count k) {
  const double theta = params.theta();
  const double kd = static_cast<double>(k);
  const double rho = params.r <= 1.0 ? theta : theta * (kd + params.r) / (kd + 1.0);
  if (rho >= 1.0) return std::numeric_limits<double>::infinity();
  return nb_pmf(params, k) / (1.0 - rho);
}

Count nb_truncation_point(const NBParams& params, double tol) {
  params.validate();
  const double theta = params.theta();
  Count k = 0;
  if (params.r > 1.0) {
    k = static_cast<Count>(std::floor((params.r - 1.0) * theta / (1.0 - theta))) + 1;
  }
  while (nb_tail_bound(params, k) >= tol) ++k;
  return k;
}

double shifted_geom_pmf(const ShiftedGeomParams& params, Count k) {
  params.validate();
  if (k < 1) return 0.0;
  return (1.0 - params.p) * std::pow(params.p, static_cast<double>(k - 1));
}

double shifted_geom_pgf(const ShiftedGeomParams& params, double s) {
  params.validate();
  require_unit_interval(s, "pgf argument s");
  return (1.0 - params.p) * s / (1.0 - params.p * s);
}

double coeff_A(Count n, Count i, double y) {
  if (n < 0 || i < 0 || i > n) {
    std::ostringstream os;
    os << "coeff_A index out of range: n=" << n << ", i=" << i;
    throw ParameterError(os.str());
  }
  require_unit_interval(y, "coeff_A argument y");
  const double nd = static_cast<double>(n);
  const double id = static_cast<double>(i);
  if (y == 0.0) return i == 0 ? 1.0 : 0.0;
  if (y == 1.0) return i == n ? 1.0 : 0.0;
  const double log_choose = std::lgamma(nd + 1.0) - std::lgamma(id + 1.0) - std::lgamma(nd - id + 1.0);
  return std::exp(log_choose + id * std::log(y) + (nd - id) * std::log1p(-y));
}

double coeff_B(double n, double l, double y) {
  if (!(l > 0.0) || !(n >= l)) {
    std::ostringstream os;
    os << "coeff_B requires n >= l > 0, got n=" << n << ", l=" << l;
    throw ParameterError(os.str());
  }
  require_unit_interval(y, "coeff_B argument y");
  if (y == 0.0) return 0.0;
  const double log_coeff = std::lgamma(n) - std::lgamma(l) - std::lgamma(n - l + 1.0);
  const double tail = n - l;
  if (y == 1.0) return tail == 0.0 ? std::exp(log_coeff) : 0.0;
  return std::exp(log_coeff + l * std::log(y) + tail * std::log1p(-y));
}

}  // namespace nbinar
