#include "nbinar/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "nbinar/errors.hpp"

namespace nbinar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_length(std::span<const Count> x, std::size_t min_len) {
  if (x.size() < min_len) {
    throw DegenerateSeriesError("series has " + std::to_string(x.size()) + " values; at least " +
                                std::to_string(min_len) + " are required");
  }
}

// Sums over the n = m - 1 transitions (X_{t-1}, X_t).
struct LagSums {
  double n = 0.0;
  double sx = 0.0;   // sum X_{t-1}
  double sy = 0.0;   // sum X_t
  double sxx = 0.0;  // sum X_{t-1}^2
  double sxy = 0.0;  // sum X_{t-1} X_t
  double denom = 0.0;
};

LagSums lag_sums(std::span<const Count> x) {
  LagSums s;
  s.n = static_cast<double>(x.size() - 1);
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const auto prev = static_cast<long double>(x[t - 1]);
    const auto cur = static_cast<long double>(x[t]);
    sx += prev;
    sy += cur;
    sxx += prev * prev;
    sxy += prev * cur;
  }
  s.sx = static_cast<double>(sx);
  s.sy = static_cast<double>(sy);
  s.sxx = static_cast<double>(sxx);
  s.sxy = static_cast<double>(sxy);
  s.denom = static_cast<double>(static_cast<long double>(s.n) * sxx - sx * sx);
  return s;
}

void require_nondegenerate(const LagSums& s) {
  if (!(s.denom > 0.0)) {
    throw DegenerateSeriesError("lagged values are constant; least-squares denominator is zero");
  }
}

bool means_in_range(double alpha_hat, double mu_eps_hat) {
  return alpha_hat > 0.0 && alpha_hat < 1.0 && mu_eps_hat > 0.0;
}

// Least-squares regression of the squared residuals on (X_{t-1}, 1).
VarianceEstimates regress_squared_residuals(std::span<const Count> x, double alpha, double mu_eps) {
  require_length(x, 3);
  const LagSums s = lag_sums(x);
  require_nondegenerate(s);
  long double sw = 0, swx = 0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double prev = static_cast<double>(x[t - 1]);
    const double u = static_cast<double>(x[t]) - alpha * prev - mu_eps;
    const long double w = static_cast<long double>(u) * u;
    sw += w;
    swx += w * prev;
  }
  VarianceEstimates v;
  v.sigma_g2_hat = static_cast<double>((s.n * swx - s.sx * sw) / s.denom);
  v.sigma_eps2_hat = static_cast<double>((s.sxx * sw - swx * s.sx) / s.denom);
  return v;
}

void fill_r_hat(VarianceEstimates& v, double mu_eps) {
  if (v.sigma_eps2_hat > mu_eps && std::isfinite(mu_eps)) {
    v.r_hat = mu_eps * mu_eps / (v.sigma_eps2_hat - mu_eps);
    v.r_defined = true;
  } else {
    v.r_hat = kNaN;
    v.r_defined = false;
  }
}

// Nelder-Mead on R^3 with reflection 1, expansion 2, contraction 1/2, shrink 1/2.
template <typename F>
struct Simplex {
  using Point = std::array<double, 3>;
  F f;
  std::array<Point, 4> pts{};
  std::array<double, 4> vals{};
  int evaluations = 0;

  double eval(const Point& p) {
    ++evaluations;
    const double v = f(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  void order() {
    std::array<std::size_t, 4> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::array<Point, 4> p2{};
    std::array<double, 4> v2{};
    for (std::size_t k = 0; k < 4; ++k) {
      p2[k] = pts[idx[k]];
      v2[k] = vals[idx[k]];
    }
    pts = p2;
    vals = v2;
  }

  double diameter() const {
    double best = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = a + 1; b < 4; ++b) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < 3; ++k) d2 += (pts[a][k] - pts[b][k]) * (pts[a][k] - pts[b][k]);
        best = std::max(best, std::sqrt(d2));
      }
    }
    return best;
  }

  static Point along(const Point& c, const Point& toward, double t) {
    Point out{};
    for (std::size_t k = 0; k < 3; ++k) out[k] = c[k] + t * (toward[k] - c[k]);
    return out;
  }

  void step() {
    Point c{};
    for (std::size_t v = 0; v < 3; ++v) {
      for (std::size_t k = 0; k < 3; ++k) c[k] += pts[v][k] / 3.0;
    }
    const Point xr = along(c, pts[3], -1.0);
    const double fr = eval(xr);
    if (fr < vals[0]) {
      const Point xe = along(c, pts[3], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[3] = xe;
        vals[3] = fe;
      } else {
        pts[3] = xr;
        vals[3] = fr;
      }
    } else if (fr < vals[2]) {
      pts[3] = xr;
      vals[3] = fr;
    } else {
      const bool outside = fr < vals[3];
      const Point xc = outside ? along(c, xr, 0.5) : along(c, pts[3], 0.5);
      const double fc = eval(xc);
      if ((outside && fc <= fr) || (!outside && fc < vals[3])) {
        pts[3] = xc;
        vals[3] = fc;
      } else {
        for (std::size_t v = 1; v < 4; ++v) {
          pts[v] = along(pts[0], pts[v], 0.5);
          vals[v] = eval(pts[v]);
        }
      }
    }
    order();
  }
};

double logit(double a) { return std::log(a / (1.0 - a)); }
double inv_logit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::string to_string(MeanMethod m) { return m == MeanMethod::cls ? "cls" : "yw"; }
std::string to_string(ResidualMode m) {
  return m == ResidualMode::estimated_means ? "estimated-means" : "known-means";
}

Matrix2 Matrix2::inverse() const {
  const double det = v[0] * v[3] - v[1] * v[2];
  return {{v[3] / det, -v[1] / det, -v[2] / det, v[0] / det}};
}

Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
  Matrix2 out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
  }
  return out;
}

double cls_objective(std::span<const Count> x, double alpha, double mu_eps) {
  double q = 0.0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double u = static_cast<double>(x[t]) - alpha * static_cast<double>(x[t - 1]) - mu_eps;
    q += u * u;
  }
  return q;
}

double variance_objective(std::span<const Count> x, double alpha, double mu_eps, double sigma_g2, double sigma_eps2) {
  double q = 0.0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double prev = static_cast<double>(x[t - 1]);
    const double u = static_cast<double>(x[t]) - alpha * prev - mu_eps;
    const double d = u * u - sigma_g2 * prev - sigma_eps2;
    q += d * d;
  }
  return q;
}

MeanEstimates cls_means(std::span<const Count> x) {
  require_length(x, 3);
  const LagSums s = lag_sums(x);
  require_nondegenerate(s);
  MeanEstimates m;
  m.method = MeanMethod::cls;
  m.n = x.size() - 1;
  m.alpha_hat = (s.n * s.sxy - s.sx * s.sy) / s.denom;
  m.mu_eps_hat = (s.sxx * s.sy - s.sx * s.sxy) / s.denom;
  m.mu_hat = m.alpha_hat == 1.0 ? kNaN : m.mu_eps_hat / (1.0 - m.alpha_hat);
  m.in_range = means_in_range(m.alpha_hat, m.mu_eps_hat);
  return m;
}

MeanEstimates yw_means(std::span<const Count> x) {
  require_length(x, 3);
  const double mean =
      std::accumulate(x.begin(), x.end(), 0.0, [](double acc, Count v) { return acc + static_cast<double>(v); }) /
      static_cast<double>(x.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double d = static_cast<double>(x[t]) - mean;
    den += d * d;
    if (t + 1 < x.size()) num += d * (static_cast<double>(x[t + 1]) - mean);
  }
  if (!(den > 0.0)) throw DegenerateSeriesError("series is constant; sample variance is zero");
  MeanEstimates m;
  m.method = MeanMethod::yw;
  m.n = x.size();
  m.alpha_hat = num / den;
  m.mu_hat = mean;
  m.mu_eps_hat = (1.0 - m.alpha_hat) * mean;
  m.in_range = means_in_range(m.alpha_hat, m.mu_eps_hat);
  return m;
}

VarianceEstimates cls_variances(std::span<const Count> x, const MeanEstimates& means) {
  VarianceEstimates v = regress_squared_residuals(x, means.alpha_hat, means.mu_eps_hat);
  v.residual_mode = ResidualMode::estimated_means;
  const double a = means.alpha_hat;
  const double mu_eps = means.mu_eps_hat;
  const double mu = mu_eps / (1.0 - a);
  v.sigma2_hat = (mu * v.sigma_g2_hat + v.sigma_eps2_hat) / (1.0 - a * a);
  v.sigma2_hat_verbatim =
      (mu_eps * v.sigma_g2_hat + (1.0 - a) * v.sigma_eps2_hat) / ((1.0 - a) * (1.0 - a) * (1.0 + a));
  fill_r_hat(v, mu_eps);
  return v;
}

VarianceEstimates cls_variances(std::span<const Count> x, const KnownMeans& known) {
  VarianceEstimates v = regress_squared_residuals(x, known.alpha, known.mu_eps);
  v.residual_mode = ResidualMode::known_means;
  const double a = known.alpha;
  const double mu = known.mu_eps / (1.0 - a);
  v.sigma2_hat = (mu * v.sigma_g2_hat + v.sigma_eps2_hat) / (1.0 - a * a);
  v.sigma2_hat_verbatim = (mu * v.sigma_g2_hat + v.sigma_eps2_hat) / ((1.0 - a) * (1.0 - a));
  fill_r_hat(v, known.mu_eps);
  return v;
}

CovMatrices predicted_cov(const ModelParams& p, VarianceKernelConstant constant) {
  p.validate();
  const CentralMoments g = g_central_moments(p);
  const CentralMoments eps = nb_central_moments(p.innovation());
  const CentralMoments xm = nb_central_moments(p.marginal());

  const double mu = p.mu;
  const double sg2 = g.m2;
  const double se2 = eps.m2;
  const double s2 = xm.m2;
  const double s4 = s2 * s2;
  const double mu3 = xm.m3;
  const double c2 = mu * sg2 + se2;

  CovMatrices out;
  out.sigma_means(0, 0) = (sg2 * mu3 + c2 * s2) / s4;
  out.sigma_means(0, 1) = -(mu * sg2 * mu3 + mu * c2 * s2 - sg2 * s4) / s4;
  out.sigma_means(1, 0) = out.sigma_means(0, 1);
  out.sigma_means(1, 1) = (mu * mu * sg2 * mu3 + mu * mu * c2 * s2 + se2 * s4 - mu * sg2 * s4) / s4;

  const double abar = 1.0 - p.alpha;
  const Matrix2 jac{{1.0, 0.0, mu / abar, 1.0 / abar}};
  out.sigma_alpha_mu = jac * out.sigma_means * jac.transpose();

  // E[R(X) X^m] for m = 0, 1, 2 by summing the NB(r, mu) pmf. Terms are
  // accumulated until the weighted tail is negligible.
  const double r_const = constant == VarianceKernelConstant::derived ? eps.m4 - se2 * se2 : g.m4 - eps.m4;
  const double c_x2 = 2.0 * sg2 * sg2;
  const double c_x1 = g.m4 + 4.0 * sg2 * se2 - 3.0 * sg2 * sg2;
  const NBParams marg = p.marginal();
  const Count floor_k = nb_truncation_point(marg, 1e-16);
  double e0 = 0.0, e1 = 0.0, e2 = 0.0, ex = 0.0, ex2 = 0.0;
  for (Count k = 0;; ++k) {
    const double kd = static_cast<double>(k);
    const double pk = nb_pmf(marg, k);
    const double rk = c_x2 * kd * kd + c_x1 * kd + r_const;
    e0 += rk * pk;
    e1 += rk * kd * pk;
    e2 += rk * kd * kd * pk;
    ex += kd * pk;
    ex2 += kd * kd * pk;
    if (k >= floor_k && std::abs(rk * kd * kd * pk) <= 1e-18 * std::abs(e2)) break;
  }
  const Matrix2 sigma1{{e2, e1, e1, e0}};
  const Matrix2 phi{{ex2, ex, ex, 1.0}};
  const Matrix2 phi_inv = phi.inverse();
  out.sigma_vars = phi_inv * sigma1 * phi_inv.transpose();
  return out;
}

LogLikelihood loglik(std::span<const Count> x, const ModelParams& p) {
  if (x.size() < 2) throw DegenerateSeriesError("log-likelihood needs at least two observations");
  p.validate();
  // Group transitions by origin so each row is evaluated once.
  std::map<Count, Count> max_dest;
  for (std::size_t t = 1; t < x.size(); ++t) {
    auto [it, inserted] = max_dest.try_emplace(x[t - 1], x[t]);
    if (!inserted) it->second = std::max(it->second, x[t]);
  }
  const TransitionKernel kernel(p, 1);
  std::map<Count, std::vector<double>> rows;
  for (const auto& [origin, dest] : max_dest) rows.emplace(origin, kernel.row(origin, dest));

  LogLikelihood out;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double prob = rows.at(x[t - 1])[static_cast<std::size_t>(x[t])];
    if (prob > 0.0) {
      out.value += std::log(prob);
    } else {
      out.value += -1e6;
      out.underflow = true;
    }
  }
  return out;
}

ModelParams cml_default_init(std::span<const Count> x, bool* fallback) {
  const double mean =
      x.empty() ? 0.0
                : std::accumulate(x.begin(), x.end(), 0.0, [](double acc, Count v) { return acc + static_cast<double>(v); }) /
                      static_cast<double>(x.size());
  const ModelParams fixed{0.5, std::max(mean, 0.1), 1.0};
  if (fallback) *fallback = false;
  try {
    const MeanEstimates yw = yw_means(x);
    const MeanEstimates cls = cls_means(x);
    const VarianceEstimates var = cls_variances(x, cls);
    ModelParams init;
    init.alpha = std::clamp(yw.alpha_hat, 0.01, 0.99);
    init.mu = yw.mu_hat;
    init.r = var.r_defined ? std::clamp(var.r_hat, 0.05, 50.0) : 50.0;
    if (!(init.mu > 0.0) || !std::isfinite(init.r)) throw DegenerateSeriesError("degenerate start");
    return init;
  } catch (const DegenerateSeriesError&) {
    if (fallback) *fallback = true;
    return fixed;
  }
}

CmlFit cml_fit(std::span<const Count> x, std::optional<ModelParams> init) {
  if (x.size() < 2) throw DegenerateSeriesError("CML needs at least two observations");
  CmlFit fit;
  if (init) {
    init->validate();
    fit.init = *init;
  } else {
    fit.init = cml_default_init(x, &fit.fallback_init);
  }

  auto objective = [x](const std::array<double, 3>& z) {
    if (std::abs(z[0]) > 40.0 || std::abs(z[1]) > 40.0 || std::abs(z[2]) > 40.0) {
      return std::numeric_limits<double>::infinity();
    }
    const ModelParams p{inv_logit(z[0]), std::exp(z[1]), std::exp(z[2])};
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) return std::numeric_limits<double>::infinity();
    return -loglik(x, p).value;
  };

  Simplex<decltype(objective)> nm{objective};
  const std::array<double, 3> z0{logit(fit.init.alpha), std::log(fit.init.mu), std::log(fit.init.r)};
  nm.pts[0] = z0;
  for (std::size_t k = 0; k < 3; ++k) {
    nm.pts[k + 1] = z0;
    nm.pts[k + 1][k] += 0.25;
  }
  for (std::size_t v = 0; v < 4; ++v) nm.vals[v] = nm.eval(nm.pts[v]);
  nm.order();

  int iter = 0;
  double diam = nm.diameter();
  while (iter < kCmlMaxIterations && diam >= kCmlDiameterTol) {
    nm.step();
    ++iter;
    diam = nm.diameter();
  }

  const auto& best = nm.pts[0];
  fit.params = {inv_logit(best[0]), std::exp(best[1]), std::exp(best[2])};
  fit.loglik = -nm.vals[0];
  fit.iterations = iter;
  fit.evaluations = nm.evaluations;
  fit.simplex_diameter = diam;
  fit.converged = diam < kCmlDiameterTol;
  return fit;
}

}  // namespace nbinar
