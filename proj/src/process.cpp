#include "nbinar/process.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nbinar/errors.hpp"

namespace nbinar {

namespace {

void require_state(Count x, const char* what) {
  if (x < 0) {
    std::ostringstream os;
    os << what << " must be a non-negative state, got " << x;
    throw ParameterError(os.str());
  }
}

void require_step(int h) {
  if (h < 1) throw ParameterError("step order h must be at least 1");
}

void require_unit(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw ParameterError("pgf argument must lie in [0, 1]");
}

std::vector<double> log_factorials(Count n) {
  std::vector<double> lf(static_cast<std::size_t>(n + 1));
  for (Count k = 0; k <= n; ++k) lf[static_cast<std::size_t>(k)] = std::lgamma(static_cast<double>(k) + 1.0);
  return lf;
}

}  // namespace

TransitionKernel::TransitionKernel(const ModelParams& p, int h) : params_(p) {
  p.validate();
  require_step(h);
  hfold_ = h_fold(p, h);
  log_b_ = std::log(hfold_.beta_h);
  log_b_bar_ = std::log1p(-hfold_.beta_h);
  log_q_ = std::log(hfold_.q_tilde_h);
  log_q_bar_ = std::log1p(-hfold_.q_tilde_h);
  lgamma_r_ = std::lgamma(p.r);
}

std::vector<double> TransitionKernel::row(Count i, Count max_j) const {
  require_state(i, "origin state i");
  require_state(max_j, "destination bound j");
  const double r = params_.r;
  const auto width = static_cast<std::size_t>(max_j + 1);
  const std::vector<double> lf = log_factorials(std::max(i, max_j));

  std::vector<double> innovation(width);
  for (Count m = 0; m <= max_j; ++m) {
    const double md = static_cast<double>(m);
    innovation[static_cast<std::size_t>(m)] =
        std::exp(std::lgamma(md + r) - lgamma_r_ - lf[static_cast<std::size_t>(m)] + r * log_q_ + md * log_q_bar_);
  }
  if (i == 0) return innovation;

  // Thinned-count pmf: A_0^(i)(b) at k = 0, then sum_l A_l^(i)(b) B_l^(k)(q).
  std::vector<double> thinned(width, 0.0);
  const double id = static_cast<double>(i);
  thinned[0] = std::exp(id * log_b_bar_);
  const double lfi = lf[static_cast<std::size_t>(i)];
  for (Count k = 1; k <= max_j; ++k) {
    double sum = 0.0;
    const Count top = std::min(k, i);
    for (Count l = 1; l <= top; ++l) {
      const double ld = static_cast<double>(l);
      const double log_a = lfi - lf[static_cast<std::size_t>(l)] - lf[static_cast<std::size_t>(i - l)] + ld * log_b_ +
                           (id - ld) * log_b_bar_;
      const double log_bk = lf[static_cast<std::size_t>(k - 1)] - lf[static_cast<std::size_t>(l - 1)] -
                            lf[static_cast<std::size_t>(k - l)] + ld * log_q_ +
                            static_cast<double>(k - l) * log_q_bar_;
      sum += std::exp(log_a + log_bk);
    }
    thinned[static_cast<std::size_t>(k)] = sum;
  }

  std::vector<double> out(width, 0.0);
  for (std::size_t j = 0; j < width; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= j; ++k) acc += thinned[k] * innovation[j - k];
    out[j] = acc;
  }
  return out;
}

double TransitionKernel::prob(Count i, Count j) const {
  require_state(j, "destination state j");
  return row(i, j)[static_cast<std::size_t>(j)];
}

Series simulate(const ModelParams& p, std::size_t n, Rng& rng) {
  p.validate();
  if (n == 0) throw ParameterError("series length n must be at least 1");
  const AltParams alt = star_to_odot(p);
  const NBParams innov = p.innovation();
  const NBParams marg = p.marginal();

  Series out;
  out.values.reserve(n);
  Count x = nb_sample(marg, rng);
  out.values.push_back(x);
  for (std::size_t t = 1; t < n; ++t) {
    x = thin_sample_odot(alt.beta, alt.theta, x, rng) + nb_sample(innov, rng);
    out.values.push_back(x);
  }
  return out;
}

double transition_prob(const ModelParams& p, Count i, Count j, int h) {
  return TransitionKernel(p, h).prob(i, j);
}

Count default_table_size(const ModelParams& p) {
  p.validate();
  return 2 * nb_truncation_point(p.marginal(), 1e-12);
}

TransitionTable transition_table(const ModelParams& p, Count max_state, int h) {
  if (max_state < 0 || max_state > kMaxTableState) {
    std::ostringstream os;
    os << "table size " << max_state << " outside [0, " << kMaxTableState << "]";
    throw ParameterError(os.str());
  }
  const TransitionKernel kernel(p, h);
  TransitionTable table;
  table.h = h;
  table.max_state = max_state;
  const std::size_t dim = table.dim();
  table.probs.resize(dim * dim);
  table.tail_mass.resize(dim);
  for (Count i = 0; i <= max_state; ++i) {
    const std::vector<double> row = kernel.row(i, max_state);
    double sum = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      table.probs[static_cast<std::size_t>(i) * dim + j] = row[j];
      sum += row[j];
    }
    table.tail_mass[static_cast<std::size_t>(i)] = std::max(0.0, 1.0 - sum);
  }
  return table;
}

ConditionalMoments conditional_moments(const ModelParams& p, Count x, int h) {
  p.validate();
  require_state(x, "conditioning state x");
  require_step(h);
  const double ah = std::pow(p.alpha, h);
  const double one_minus = 1.0 - ah;
  const double xd = static_cast<double>(x);
  ConditionalMoments m;
  m.mean = ah * xd + p.mu * one_minus;
  m.variance = (2.0 * p.mu / p.r + 1.0) * ah * one_minus * xd + p.mu * one_minus * (1.0 + one_minus * p.mu / p.r);
  return m;
}

double conditional_pgf(const ModelParams& p, Count x, int h, double s) {
  require_state(x, "conditioning state x");
  require_unit(s);
  const HFoldParams hf = h_fold(p, h);
  const double q = hf.q_tilde_h;
  const double denom = 1.0 - (1.0 - q) * s;
  const double thinned = 1.0 - hf.alpha_h * q * (1.0 - s) / denom;
  return std::pow(thinned, static_cast<double>(x)) * std::pow(q / denom, p.r);
}

double joint_pgf(const ModelParams& p, double s1, double s2) {
  p.validate();
  require_unit(s1);
  require_unit(s2);
  const double r = p.r;
  const double mu = p.mu;
  const double mu_eps = (1.0 - p.alpha) * mu;
  // Only s1 + s2 and s1 * s2 enter, so the value is bitwise symmetric.
  const double sum = s1 + s2;
  const double product = s1 * s2;
  const double inner = (r + mu) * (r + mu_eps) - mu_eps * (r + mu) * sum + mu * (mu_eps - r * p.alpha) * product;
  return std::pow(inner / (r * r), -r);
}

double autocorrelation(const ModelParams& p, int k) {
  p.validate();
  if (k < 0) throw ParameterError("lag must be non-negative");
  return std::pow(p.alpha, k);
}

Count ma_sample(const ModelParams& p, int truncation, Rng& rng) {
  p.validate();
  if (truncation < 0) throw ParameterError("moving-average truncation must be non-negative");
  const NBParams innov = p.innovation();
  const double theta = star_to_odot(p).theta;
  Count total = nb_sample(innov, rng);
  for (int j = 1; j <= truncation; ++j) {
    const double beta_j = h_fold(p, j).beta_h;
    total += thin_sample_odot(beta_j, theta, nb_sample(innov, rng), rng);
  }
  return total;
}

}  // namespace nbinar
