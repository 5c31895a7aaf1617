// Reference computations for the unit and acceptance tests. Nothing here calls
// into the library: every value is rebuilt from pmf recurrences, explicit
// convolutions, power series, and closed-form factorial moments.
#ifndef NBINAR_TESTS_ORACLES_HPP
#define NBINAR_TESTS_ORACLES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using Pmf = std::vector<double>;

// NB(r, mu) pmf on 0..k_max via p_0 = (1 - theta)^r, p_k = p_{k-1} theta (k - 1 + r) / k.
inline Pmf nb_pmf(double r, double mu, std::size_t k_max) {
  const double theta = mu / (mu + r);
  Pmf out(k_max + 1);
  out[0] = std::pow(1.0 - theta, r);
  for (std::size_t k = 1; k <= k_max; ++k) {
    out[k] = out[k - 1] * theta * (static_cast<double>(k) - 1.0 + r) / static_cast<double>(k);
  }
  return out;
}

// Offspring pmf with P(0) = 1 - a q and P(k) = a q q (1 - q)^(k-1) for k >= 1,
// where a is the thinning mean and q the shifted-geometric success probability.
inline Pmf offspring_pmf(double a, double q, std::size_t k_max) {
  Pmf out(k_max + 1);
  out[0] = 1.0 - a * q;
  double tail = 1.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    out[k] = a * q * q * tail;
    tail *= 1.0 - q;
  }
  return out;
}

inline double q_tilde(double alpha, double mu, double r) { return r / (r + (1.0 - alpha) * mu); }

// Convolution truncated to 0..k_max; exact on that window for pmfs on {0,1,...}.
inline Pmf convolve(const Pmf& a, const Pmf& b, std::size_t k_max) {
  Pmf out(k_max + 1, 0.0);
  for (std::size_t i = 0; i < a.size() && i <= k_max; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size() && i + j <= k_max; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

inline Pmf point_mass(std::size_t k_max) {
  Pmf out(k_max + 1, 0.0);
  out[0] = 1.0;
  return out;
}

inline Pmf conv_power(const Pmf& base, std::size_t x, std::size_t k_max) {
  Pmf out = point_mass(k_max);
  for (std::size_t i = 0; i < x; ++i) out = convolve(out, base, k_max);
  return out;
}

// pmf of sum_{i=1}^{Y} G_i with Y ~ outer and G_i ~ inner.
inline Pmf random_sum(const Pmf& outer, const Pmf& inner, std::size_t k_max) {
  Pmf out(k_max + 1, 0.0);
  Pmf power = point_mass(k_max);
  for (std::size_t y = 0; y < outer.size(); ++y) {
    if (y > 0) power = convolve(power, inner, k_max);
    for (std::size_t k = 0; k <= k_max; ++k) out[k] += outer[y] * power[k];
  }
  return out;
}

// h-fold offspring pmf as the h-times iterated random sum of the one-step law.
inline Pmf hfold_offspring_pmf(double alpha, double mu, double r, int h, std::size_t k_max) {
  const Pmf g = offspring_pmf(alpha, q_tilde(alpha, mu, r), k_max);
  Pmf out = g;
  for (int step = 1; step < h; ++step) out = random_sum(out, g, k_max);
  return out;
}

// P(thinned count = k | X = x) by x-fold convolution of the h-fold offspring law.
inline Pmf thinned_pmf(double alpha, double mu, double r, std::size_t x, int h, std::size_t k_max) {
  return conv_power(hfold_offspring_pmf(alpha, mu, r, h, k_max), x, k_max);
}

// Row i of the h-step transition law: thinned pmf convolved with the h-step innovation.
inline Pmf transition_row(double alpha, double mu, double r, std::size_t i, int h, std::size_t k_max) {
  const double ah = std::pow(alpha, h);
  return convolve(thinned_pmf(alpha, mu, r, i, h, k_max), nb_pmf(r, (1.0 - ah) * mu, k_max), k_max);
}

inline double binomial(long n, long k) {
  if (k < 0 || k > n) return 0.0;
  long double out = 1.0L;
  for (long m = 1; m <= k; ++m) out = out * static_cast<long double>(n - k + m) / static_cast<long double>(m);
  return static_cast<double>(out);
}

// Geometric-marginal (r = 1) h-step transition probability written out with
// explicit binomial coefficients A_l^(n)(y) = C(n,l) y^l (1-y)^(n-l) and
// B_l^(n)(y) = C(n-1,l-1) y^l (1-y)^(n-l).
inline double geometric_transition(double alpha, double mu, long i, long j, int h) {
  const double ah = std::pow(alpha, h);
  const double qh = 1.0 / (1.0 + (1.0 - ah) * mu);
  const double y = ah * qh;
  auto A = [](long n, long l, double v) { return binomial(n, l) * std::pow(v, l) * std::pow(1.0 - v, n - l); };
  auto B = [](long n, long l, double v) { return binomial(n - 1, l - 1) * std::pow(v, l) * std::pow(1.0 - v, n - l); };
  if (i == 0) return qh * std::pow(1.0 - qh, j);
  double out = A(i, 0, y) * B(j + 1, 1, qh);
  for (long k = 1; k <= j; ++k) {
    double inner = 0.0;
    for (long l = 1; l <= std::min(i, k); ++l) inner += A(i, l, y) * B(k, l, qh);
    out += B(j - k + 1, 1, qh) * inner;
  }
  return out;
}

inline double pgf_series(const Pmf& pmf, double s) {
  double out = 0.0;
  double power = 1.0;
  for (double p : pmf) {
    out += p * power;
    power *= s;
  }
  return out;
}

inline double central_moment(const Pmf& pmf, int m) {
  double mean = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) mean += static_cast<double>(k) * pmf[k];
  double out = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) out += std::pow(static_cast<double>(k) - mean, m) * pmf[k];
  return out;
}

inline double total_variation(const Pmf& a, const Pmf& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double out = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double pa = k < a.size() ? a[k] : 0.0;
    const double pb = k < b.size() ? b[k] : 0.0;
    out += std::abs(pa - pb);
  }
  return 0.5 * out;
}

template <class Counts>
Pmf empirical_pmf(const Counts& draws, std::size_t k_max) {
  Pmf out(k_max + 1, 0.0);
  double outside = 0.0;
  for (auto d : draws) {
    if (d >= 0 && static_cast<std::size_t>(d) <= k_max) {
      out[static_cast<std::size_t>(d)] += 1.0;
    } else {
      outside += 1.0;
    }
  }
  const double n = static_cast<double>(draws.size());
  for (double& v : out) v /= n;
  out.push_back(outside / n);  // overflow bin
  return out;
}

template <class Counts>
double sample_autocorrelation(const Counts& x, std::size_t lag) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (auto v : x) mean += static_cast<double>(v);
  mean /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double d = static_cast<double>(x[t]) - mean;
    den += d * d;
    if (t + lag < x.size()) num += d * (static_cast<double>(x[t + lag]) - mean);
  }
  return num / den;
}

// Raw NB moments E[X^m], m = 0..4, from factorial moments (r)_k (mu/r)^k.
inline std::array<double, 5> nb_raw_moments(double r, double mu) {
  std::array<double, 5> f{};
  f[0] = 1.0;
  for (int k = 1; k <= 4; ++k) f[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>(k - 1)] * (r + k - 1) * (mu / r);
  return {1.0, f[1], f[2] + f[1], f[3] + 3.0 * f[2] + f[1], f[4] + 6.0 * f[3] + 7.0 * f[2] + f[1]};
}

using Mat2 = std::array<double, 4>;  // row-major

inline Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

inline Mat2 inv(const Mat2& a) {
  const double det = a[0] * a[3] - a[1] * a[2];
  return {a[3] / det, -a[1] / det, -a[2] / det, a[0] / det};
}

// Sandwich covariance V^{-1} W V^{-1} of least squares on regressors
// z = (X_{t-1}, 1), where W = E[w(X) z z'] for conditional variance weight w.
template <class Weight>
Mat2 sandwich(double r, double mu, Weight w, std::size_t k_max) {
  const Pmf pi = nb_pmf(r, mu, k_max);
  Mat2 v{}, m{};
  for (std::size_t x = 0; x <= k_max; ++x) {
    const double xd = static_cast<double>(x);
    const Mat2 zz{xd * xd, xd, xd, 1.0};
    const double wx = w(x);
    for (int e = 0; e < 4; ++e) {
      v[static_cast<std::size_t>(e)] += pi[x] * zz[static_cast<std::size_t>(e)];
      m[static_cast<std::size_t>(e)] += pi[x] * wx * zz[static_cast<std::size_t>(e)];
    }
  }
  const Mat2 vi = inv(v);
  return mul(mul(vi, m), vi);
}

// Conditional variance of X_t given X_{t-1} = x, and of the squared one-step
// residual, both by summing the brute-force transition row.
struct RowMoments {
  double mean = 0.0;
  double var = 0.0;
  double var_sq_residual = 0.0;  // Var((X_t - E[X_t | x])^2 | x)
};

inline RowMoments row_moments(const Pmf& row) {
  RowMoments out;
  for (std::size_t k = 0; k < row.size(); ++k) out.mean += static_cast<double>(k) * row[k];
  double m2 = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double d = static_cast<double>(k) - out.mean;
    m2 += d * d * row[k];
    m4 += d * d * d * d * row[k];
  }
  out.var = m2;
  out.var_sq_residual = m4 - m2 * m2;
  return out;
}

}  // namespace oracle

#endif  // NBINAR_TESTS_ORACLES_HPP
