#include "nbinar/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "nbinar/distributions.hpp"
#include "nbinar/estimation.hpp"
#include "nbinar/process.hpp"
#include "nbinar/thinning.hpp"

namespace nbinar {

namespace {

const ModelParams kGrid[] = {{0.3, 1.5, 0.8}, {0.5, 2.0, 1.0}, {0.7, 4.0, 2.5}};

std::vector<double> s_grid(double step) {
  std::vector<double> out;
  const int count = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= count; ++i) out.push_back(i * step);
  return out;
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

// Worst residual-to-tolerance ratio over every check in a suite.
class Tracker {
 public:
  void record(double residual, double tol) {
    const double ratio = std::isfinite(residual) ? residual / tol : 1e300;
    if (ratio > worst_ratio_) {
      worst_ratio_ = ratio;
      worst_residual_ = residual;
      worst_tol_ = tol;
    }
  }
  void require(bool condition) { record(condition ? 0.0 : 1.0, 0.5); }

  bool passed() const { return worst_ratio_ <= 1.0; }
  std::string detail() const {
    return "worst residual " + sci(worst_residual_) + " against tol " + sci(worst_tol_);
  }

 private:
  double worst_ratio_ = 0.0;
  double worst_residual_ = 0.0;
  double worst_tol_ = 1.0;
};

Tracker distributions_suite() {
  Tracker t;
  for (double r : {0.5, 1.0, 2.5}) {
    for (double mu : {0.5, 2.0, 5.0}) {
      const NBParams nb{r, mu};
      const double theta = nb.theta();
      const Count k_max = nb_truncation_point(nb);
      double mass = 0.0;
      for (Count k = 0; k <= k_max; ++k) {
        const double pk = nb_pmf(nb, k);
        t.record(std::abs(pk - coeff_B(static_cast<double>(k) + r, r, 1.0 - theta)), 1e-13);
        mass += pk;
      }
      t.record(std::abs(1.0 - mass), 1e-12);
      const CentralMoments cm = nb_central_moments(nb);
      double m2 = 0.0, m3 = 0.0, m4 = 0.0;
      for (Count k = 0; k <= 4 * k_max; ++k) {
        const double d = static_cast<double>(k) - mu;
        const double pk = nb_pmf(nb, k);
        m2 += d * d * pk;
        m3 += d * d * d * pk;
        m4 += d * d * d * d * pk;
      }
      t.record(std::abs(m2 - cm.m2) / cm.m2, 1e-10);
      t.record(std::abs(m3 - cm.m3) / cm.m3, 1e-10);
      t.record(std::abs(m4 - cm.m4) / cm.m4, 1e-10);
    }
  }
  for (Count n = 1; n <= 50; ++n) {
    double sum = 0.0;
    for (Count i = 0; i <= n; ++i) sum += coeff_A(n, i, 0.37);
    t.record(std::abs(sum - 1.0), 1e-15 * static_cast<double>(n + 1));
  }
  return t;
}

Tracker operator_suite() {
  Tracker t;
  for (const auto& p : kGrid) {
    const AltParams alt = star_to_odot(p);
    for (double s : s_grid(0.1)) t.record(std::abs(g_pgf(p, s) - psi_odot(alt.beta, alt.theta, s)), 1e-14);
    const ModelParams back = odot_to_star(alt);
    t.record(std::abs(back.alpha - p.alpha), 1e-14);
    t.record(std::abs(back.mu - p.mu) / p.mu, 1e-14);
  }
  return t;
}

double functional_equation_residual(bool inject_fault) {
  double worst = 0.0;
  for (const auto& p : kGrid) {
    ModelParams offspring = p;
    if (inject_fault) offspring.alpha *= 1.0 + 1e-4;
    for (double s : s_grid(0.05)) {
      const double lhs = nb_pgf(p.marginal(), s);
      const double rhs = nb_pgf(p.marginal(), g_pgf(offspring, s)) * nb_pgf(p.innovation(), s);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

Tracker hfold_suite() {
  Tracker t;
  for (const auto& p : kGrid) {
    const AltParams alt = star_to_odot(p);
    double prev_beta = 1.0;
    for (int h = 1; h <= 6; ++h) {
      const HFoldParams hf = h_fold(p, h);
      t.record(std::abs(hf.beta_h - hf.alpha_h * hf.q_tilde_h), 1e-13);
      t.record(std::abs(1.0 - (1.0 - hf.beta_h) * hf.theta - hf.q_tilde_h), 1e-13);
      t.require(hf.beta_h < prev_beta);
      prev_beta = hf.beta_h;
      const HFoldParams next = h_fold(p, h + 1);
      for (double s : s_grid(0.1)) {
        const double composed = psi_odot(alt.beta, alt.theta, psi_odot(hf.beta_h, hf.theta, s));
        t.record(std::abs(composed - psi_odot(next.beta_h, next.theta, s)), 1e-12);
      }
    }
  }
  return t;
}

Tracker conditional_pmf_suite() {
  Tracker t;
  for (const auto& p : kGrid) {
    for (Count x = 0; x <= 20; ++x) {
      for (int h = 1; h <= 5; ++h) {
        double sum = 0.0;
        for (Count k = 0; k <= 250; ++k) sum += thin_conditional_pmf(p, x, h, k);
        t.record(std::abs(sum - 1.0), 1e-10);
      }
    }
  }
  return t;
}

Tracker transition_suite() {
  Tracker t;
  for (const auto& p : kGrid) {
    const Count big = default_table_size(p);
    for (int h : {1, 2, 5}) {
      const TransitionTable table = transition_table(p, big, h);
      for (Count i = 0; i <= 20; ++i) {
        t.record(table.tail_mass[static_cast<std::size_t>(i)], 1e-9);
        for (Count j = 0; j <= 20; ++j) t.require(table.at(i, j) > 0.0);
      }
    }
    // Stationary fixed point on 0..40; Chapman-Kolmogorov on the 0..30 window
    // with the inner sum running over the wide support.
    const TransitionTable p1 = transition_table(p, big, 1);
    const TransitionTable p2 = transition_table(p, 30, 2);
    const NBParams marg = p.marginal();
    for (Count j = 0; j <= 40; ++j) {
      double acc = 0.0;
      for (Count i = 0; i <= big; ++i) acc += nb_pmf(marg, i) * p1.at(i, j);
      t.record(std::abs(acc - nb_pmf(marg, j)), 1e-8);
    }
    for (Count i = 0; i <= 30; ++i) {
      for (Count j = 0; j <= 30; ++j) {
        double acc = 0.0;
        for (Count k = 0; k <= big; ++k) acc += p1.at(i, k) * p1.at(k, j);
        t.record(std::abs(acc - p2.at(i, j)), 1e-8);
      }
    }
  }
  return t;
}

Tracker joint_pgf_suite() {
  Tracker t;
  for (const auto& p : kGrid) {
    for (double s1 : s_grid(0.1)) {
      t.record(std::abs(joint_pgf(p, s1, 1.0) - nb_pgf(p.marginal(), s1)), 1e-13);
      for (double s2 : s_grid(0.1)) t.record(std::abs(joint_pgf(p, s1, s2) - joint_pgf(p, s2, s1)), 1e-15);
    }
  }
  return t;
}

Tracker moment_suite() {
  Tracker t;
  for (const auto& p : kGrid) {
    const double sg2 = g_central_moments(p).m2;
    const CentralMoments eps = nb_central_moments(p.innovation());
    const double s2 = nb_central_moments(p.marginal()).m2;
    const double mu_eps = p.mu_eps();
    t.record(std::abs(eps.m2 - mu_eps - mu_eps * mu_eps / p.r), 1e-13);
    t.record(std::abs(p.mu * sg2 + eps.m2 - (1.0 - p.alpha * p.alpha) * s2), 1e-12);
  }
  return t;
}

}  // namespace

bool SelftestResult::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
}

SelftestResult run_selftest(const SelftestOptions& options) {
  SelftestResult out;
  auto guarded = [&](const std::string& name, const std::function<Tracker()>& body) {
    try {
      const Tracker t = body();
      out.suites.push_back({name, t.passed(), t.detail()});
    } catch (const std::exception& e) {
      out.suites.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  guarded("distributions", distributions_suite);
  guarded("operator-equivalence", operator_suite);
  guarded("functional-equation", [&] {
    Tracker t;
    out.functional_equation_residual = functional_equation_residual(options.inject_fault);
    t.record(out.functional_equation_residual, 1e-12);
    return t;
  });
  guarded("h-fold-semigroup", hfold_suite);
  guarded("conditional-pmf-normalization", conditional_pmf_suite);
  guarded("transition-law", transition_suite);
  guarded("joint-pgf", joint_pgf_suite);
  guarded("moment-relations", moment_suite);
  return out;
}

void print_selftest(std::ostream& os, const SelftestResult& result) {
  for (const auto& s : result.suites) {
    os << (s.passed ? "PASS " : "FAIL ") << std::left << std::setw(32) << s.name << s.detail << '\n';
  }
  os << "functional-equation residual max over grid: " << sci(result.functional_equation_residual) << '\n';
  os << (result.passed() ? "selftest: all suites passed" : "selftest: FAILURES") << '\n';
}

}  // namespace nbinar
