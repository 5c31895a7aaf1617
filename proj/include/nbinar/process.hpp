#ifndef NBINAR_PROCESS_HPP
#define NBINAR_PROCESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nbinar/distributions.hpp"
#include "nbinar/thinning.hpp"

namespace nbinar {

struct SeriesMeta {
  std::uint64_t seed = 0;
  ModelParams params;
  std::string mode = "stationary";
};

// Time-ordered non-negative counts X_0, X_1, ...
struct Series {
  std::vector<Count> values;
  std::optional<SeriesMeta> meta;

  std::size_t size() const { return values.size(); }
};

// Dense truncation of the h-step transition matrix on states 0..max_state.
struct TransitionTable {
  int h = 1;
  Count max_state = 0;
  std::vector<double> probs;      // row-major, (max_state+1)^2
  std::vector<double> tail_mass;  // 1 - row sum, per row

  double at(Count i, Count j) const { return probs[static_cast<std::size_t>(i * (max_state + 1) + j)]; }
  std::size_t dim() const { return static_cast<std::size_t>(max_state + 1); }
};

struct ConditionalMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Evaluates rows of the h-step transition law P(X_{t+h} = j | X_t = i) as the
// convolution of the thinned-count pmf with the NB(r, (1 - alpha^h) mu)
// innovation pmf, all terms in log space. Immutable and thread-safe.
class TransitionKernel {
 public:
  TransitionKernel(const ModelParams& p, int h);

  // p_{i,0}, ..., p_{i,max_j}.
  std::vector<double> row(Count i, Count max_j) const;
  double prob(Count i, Count j) const;

  const HFoldParams& hfold() const { return hfold_; }

 private:
  ModelParams params_;
  HFoldParams hfold_;
  double log_b_ = 0.0;
  double log_b_bar_ = 0.0;
  double log_q_ = 0.0;
  double log_q_bar_ = 0.0;
  double lgamma_r_ = 0.0;
};

// Stationary path of length n: X_0 ~ NB(r, mu), then thinning plus innovation.
Series simulate(const ModelParams& p, std::size_t n, Rng& rng);

double transition_prob(const ModelParams& p, Count i, Count j, int h);

inline constexpr Count kMaxTableState = 5000;

// Default truncation: twice the NB(r, mu) tail rule at 1e-12.
Count default_table_size(const ModelParams& p);
TransitionTable transition_table(const ModelParams& p, Count max_state, int h);

ConditionalMoments conditional_moments(const ModelParams& p, Count x, int h);
double conditional_pgf(const ModelParams& p, Count x, int h, double s);
// Joint pgf of (X_t, X_{t+1}).
double joint_pgf(const ModelParams& p, double s1, double s2);
double autocorrelation(const ModelParams& p, int k);

// Truncated moving-average draw sum_{j=0}^{J} (beta_j, theta) . eps_j with beta_0 = 1.
Count ma_sample(const ModelParams& p, int truncation, Rng& rng);

}  // namespace nbinar

#endif  // NBINAR_PROCESS_HPP
