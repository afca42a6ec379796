#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "limix/task_streams.hpp"

namespace limix {

// Affinity floor; caps the exponent 1/K at 1e6, which the log-space
// normalisation handles without overflow.
inline constexpr double kAffinityFloor = 1e-6;

struct GateConfig {
  double a = 1.0;       // Dirichlet concentration
  double V = 3.0;       // expansion constant: a pseudo-affinity for the
                        // would-be new component, on the same scale as K_ij
  int n_G = 64;         // group size for the per-task indicator
  std::int64_t n_total = 0;  // running count of training samples seen
  bool force_expand = false;  // control mode: every task gets a new component
};

// Per-sample knowledge affinities against the K existing components.
struct AffinityRow {
  std::vector<double> k_values;
  int component_count() const { return static_cast<int>(k_values.size()); }
};

// |component log-likelihood on the sample - on its own replay|, floored.
double knowledge_affinity(double component_loglik, double replay_loglik);

// Soft count n_{-i,j} = (n-1) * softmax share of exp(1/K_ij) against the
// other components and exp(1/V).
double effective_count(const GateConfig& cfg, const AffinityRow& row, int j);

// Length K+1 probability vector (components..., NEW last). Entries are
// positive and sum to one:
//   p(c=j)   = n_{-i,j} / (n-1+a)
//   p(c=NEW) = (a + (n-1) * exp(1/V)-share) / (n-1+a)
std::vector<double> assignment_probs(const GateConfig& cfg, const AffinityRow& row);

struct IndicatorDecision {
  std::vector<double> probs;  // length K+1, NEW last; column mean of rows
  int chosen = 0;             // component index, or == K meaning NEW
  std::vector<std::vector<double>> per_sample_probs;  // n_G x (K+1)

  bool is_new() const { return chosen == static_cast<int>(probs.size()) - 1; }
};

// Read-only evaluation handle a component exposes to the gate: score a
// sample's log-likelihood (ELBO, or the conditional generator objective in
// supervised mode) and draw one replay sample.
class ComponentScorer {
 public:
  virtual ~ComponentScorer() = default;
  virtual double log_likelihood(const Sample& s, RngEngine& rng) const = 0;
  virtual Sample generate(RngEngine& rng) const = 0;
};

// The per-task indicator (one decision for the whole group): average the
// per-sample assignment probabilities and take the argmax. Ties break to the
// lowest component index; NEW loses ties to any existing component. An empty
// component list yields NEW by convention.
IndicatorDecision task_indicator(const GateConfig& cfg, std::span<const Sample> group,
                                 std::span<const ComponentScorer* const> components,
                                 std::uint64_t seed);

}  // namespace limix
