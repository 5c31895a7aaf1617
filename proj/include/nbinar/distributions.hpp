#ifndef NBINAR_DISTRIBUTIONS_HPP
#define NBINAR_DISTRIBUTIONS_HPP

#include <cstdint>
#include <random>

namespace nbinar {

using Rng = std::mt19937_64;
using Count = std::int64_t;

// Negative binomial law NB(r, mu): shape r, mean mu. The equivalent NB1
// form uses theta = mu / (mu + r), with pmf Gamma(k+r)/(k! Gamma(r)) (1-theta)^r theta^k.
struct NBParams {
  double r = 1.0;
  double mu = 1.0;

  double theta() const { return mu / (mu + r); }
  // Throws ParameterError unless r > 0 and mu > 0 (both finite).
  void validate() const;
};

// Shifted geometric on {1, 2, ...}: f_k = (1-p) p^(k-1), pgf (1-p)s / (1-ps).
struct ShiftedGeomParams {
  double p = 0.5;
  void validate() const;
};

struct CentralMoments {
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

// Natural log of |Gamma(x)| for x > 0.
double log_gamma(double x);

double nb_log_pmf(const NBParams& params, Count k);
double nb_pmf(const NBParams& params, Count k);
double nb_pgf(const NBParams& params, double s);
Count nb_sample(const NBParams& params, Rng& rng);
CentralMoments nb_central_moments(const NBParams& params);

// Smallest K past the mode whose geometric tail bound pmf(K) * rho / (1 - rho)
// falls below tol, where rho bounds pmf(k+1)/pmf(k) for all k >= K. For r <= 1
// this reduces to pmf(K) / (1 - theta) < tol.
Count nb_truncation_point(const NBParams& params, double tol = 1e-14);
// The tail bound used by nb_truncation_point, evaluated at K.
double nb_tail_bound(const NBParams& params, Count k);

double shifted_geom_pmf(const ShiftedGeomParams& params, Count k);
double shifted_geom_pgf(const ShiftedGeomParams& params, double s);

// A_i^(n)(y) = C(n, i) y^i (1-y)^(n-i), 0 <= i <= n.
double coeff_A(Count n, Count i, double y);
// B_l^(n)(y) = Gamma(n) / (Gamma(l) Gamma(n-l+1)) y^l (1-y)^(n-l) for real n >= l > 0.
// For integers this is C(n-1, l-1) y^l (1-y)^(n-l).
double coeff_B(double n, double l, double y);

}  // namespace nbinar

#endif  // NBINAR_DISTRIBUTIONS_HPP
