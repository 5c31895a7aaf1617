#include <doctest.h>

#include <cmath>
#include <vector>

#include "nbinar/distributions.hpp"
#include "nbinar/errors.hpp"
#include "oracles.hpp"

using namespace nbinar;

TEST_CASE("nb_pmf hand values and normalization") {
  const NBParams geo{1.0, 2.0};
  CHECK(nb_pmf(geo, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  double mass = 0.0;
  for (Count k = 0; k <= 200; ++k) mass += nb_pmf(geo, k);
  CHECK(std::abs(mass - 1.0) < 1e-12);
  CHECK(nb_pmf(geo, -1) == 0.0);
}

TEST_CASE("nb_pmf matches the ratio recurrence") {
  for (double r : {0.3, 1.0, 2.5, 17.0}) {
    for (double mu : {0.1, 4.0, 30.0}) {
      const auto ref = oracle::nb_pmf(r, mu, 150);
      for (Count k = 0; k <= 150; ++k) {
        const double got = nb_pmf({r, mu}, k);
        CHECK(std::abs(got - ref[static_cast<std::size_t>(k)]) <= 1e-12 * std::max(ref[static_cast<std::size_t>(k)], 1e-300) + 1e-300);
      }
    }
  }
  CHECK(nb_pmf({2.5, 4.0}, 3) == doctest::Approx(oracle::nb_pmf(2.5, 4.0, 3)[3]).epsilon(1e-13));
}

TEST_CASE("nb_log_pmf far in the tail stays finite") {
  const double lp = nb_log_pmf({1.0, 2.0}, 5000);
  CHECK(std::isfinite(lp));
  CHECK(lp == doctest::Approx(std::log(1.0 / 3.0) + 5000.0 * std::log(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("parameter domain is enforced") {
  CHECK_THROWS_AS(nb_pmf({0.0, 1.0}, 0), ParameterError);
  CHECK_THROWS_AS(nb_pmf({1.0, -1.0}, 0), ParameterError);
  CHECK_THROWS_AS(nb_pgf({1.0, 1.0}, 1.5), ParameterError);
}

TEST_CASE("nb_pgf boundary values and series oracle") {
  const NBParams geo{1.0, 2.0};
  CHECK(nb_pgf(geo, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nb_pgf(geo, 0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto pmf = oracle::nb_pmf(2.0, 3.0, 400);
  CHECK(std::abs(nb_pgf({2.0, 3.0}, 0.5) - oracle::pgf_series(pmf, 0.5)) < 1e-14);
}

TEST_CASE("nb_central_moments against brute-force sums") {
  const auto cm = nb_central_moments({1.0, 2.0});
  CHECK(cm.mean == doctest::Approx(2.0));
  CHECK(cm.m2 == doctest::Approx(6.0).epsilon(1e-13));
  CHECK(cm.m3 == doctest::Approx(30.0).epsilon(1e-13));
  CHECK(cm.m4 == doctest::Approx(330.0).epsilon(1e-13));
  for (double r : {0.4, 1.0, 3.0}) {
    for (double mu : {0.5, 2.0, 6.0}) {
      const auto pmf = oracle::nb_pmf(r, mu, 2000);
      const auto got = nb_central_moments({r, mu});
      CHECK(got.m2 == doctest::Approx(oracle::central_moment(pmf, 2)).epsilon(1e-10));
      CHECK(got.m3 == doctest::Approx(oracle::central_moment(pmf, 3)).epsilon(1e-10));
      CHECK(got.m4 == doctest::Approx(oracle::central_moment(pmf, 4)).epsilon(1e-10));
      CHECK(got.m2 > 0.0);
      CHECK(got.m4 >= got.m2 * got.m2);
      // Second derivative of the pgf at 1 gives E[X(X-1)]; second-order backward stencil.
      const double step = 1e-4;
      auto f = [&](int i) { return nb_pgf({r, mu}, 1.0 - i * step); };
      const double d2 = (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / (step * step);
      const double var_from_pgf = d2 + mu - mu * mu;
      CHECK(var_from_pgf == doctest::Approx(got.m2).epsilon(1e-4));
    }
  }
}

TEST_CASE("nb_sample matches the pmf") {
  Rng rng(20240601);
  std::vector<Count> draws(200000);
  for (auto& d : draws) d = nb_sample({1.0, 2.0}, rng);
  const auto emp = oracle::empirical_pmf(draws, 60);
  auto ref = oracle::nb_pmf(1.0, 2.0, 60);
  double tail = 1.0;
  for (double p : ref) tail -= p;
  ref.push_back(tail);
  CHECK(oracle::total_variation(emp, ref) < 0.01);

  Rng rng2(5);
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) zeros += nb_sample({1.0, 1e-9}, rng2) == 0;
  CHECK(zeros >= 9999);

  Rng rng3(77);
  const int n = 200000;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += static_cast<double>(nb_sample({3.0, 5.0}, rng3));
  mean /= n;
  const double sd = std::sqrt(5.0 + 25.0 / 3.0);
  CHECK(std::abs(mean - 5.0) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("truncation point bounds the tail") {
  for (double r : {0.3, 1.0, 4.0}) {
    for (double mu : {0.5, 3.0, 20.0}) {
      const NBParams nb{r, mu};
      const Count k = nb_truncation_point(nb, 1e-12);
      const auto pmf = oracle::nb_pmf(r, mu, static_cast<std::size_t>(k) + 5000);
      double tail = 0.0;
      for (std::size_t j = static_cast<std::size_t>(k) + 1; j < pmf.size(); ++j) tail += pmf[j];
      CHECK(tail <= 1e-12);
      CHECK(nb_tail_bound(nb, k) >= tail * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("shifted geometric") {
  const ShiftedGeomParams g{0.5};
  CHECK(shifted_geom_pmf(g, 0) == 0.0);
  CHECK(shifted_geom_pmf(g, 1) == doctest::Approx(0.5));
  CHECK(shifted_geom_pmf(g, 3) == doctest::Approx(0.125));
  const double s = 0.3;
  double series = 0.0;
  for (Count k = 1; k <= 200; ++k) series += shifted_geom_pmf(g, k) * std::pow(s, static_cast<double>(k));
  CHECK(shifted_geom_pgf(g, s) == doctest::Approx(series).epsilon(1e-14));
}

TEST_CASE("coeff_A and coeff_B") {
  CHECK(coeff_A(1, 1, 0.25) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(coeff_A(5, 0, 0.3) == doctest::Approx(std::pow(0.7, 5)).epsilon(1e-14));
  for (Count n : {1, 7, 40}) {
    for (double y : {0.0, 0.2, 0.9, 1.0}) {
      double sum = 0.0;
      for (Count i = 0; i <= n; ++i) sum += coeff_A(n, i, y);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
      for (Count i = 0; i <= n; ++i) {
        CHECK(coeff_A(n, i, y) ==
              doctest::Approx(oracle::binomial(n, i) * std::pow(y, i) * std::pow(1.0 - y, n - i)).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(coeff_A(3, 4, 0.5), ParameterError);

  CHECK(coeff_B(2.0, 1.0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(coeff_B(1.0, 1.0, 1.0 / 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  for (double l : {1.0, 2.5, 6.0}) CHECK(coeff_B(l, l, 0.4) == doctest::Approx(std::pow(0.4, l)).epsilon(1e-14));
  for (long n = 1; n <= 12; ++n) {
    for (long l = 1; l <= n; ++l) {
      const double ref = oracle::binomial(n - 1, l - 1) * std::pow(0.3, l) * std::pow(0.7, n - l);
      CHECK(coeff_B(static_cast<double>(n), static_cast<double>(l), 0.3) == doctest::Approx(ref).epsilon(1e-13));
    }
  }
}

TEST_CASE("log_gamma") {
  CHECK(log_gamma(1.0) == doctest::Approx(0.0));
  CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-15));
  CHECK(log_gamma(11.0) == doctest::Approx(std::log(3628800.0)).epsilon(1e-15));
}
