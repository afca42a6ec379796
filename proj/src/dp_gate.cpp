#include "limix/dp_gate.hpp"

#include <algorithm>
#include <cmath>

#include "limix/errors.hpp"

namespace limix {

namespace {

// Normalised weights of {exp(1/K_i1), ..., exp(1/K_iK), exp(1/V)} computed in
// log space; exponents reach 1/kAffinityFloor so the direct form overflows.
std::vector<double> weight_shares(const GateConfig& cfg, const AffinityRow& row) {
  const int k = row.component_count();
  std::vector<double> exponents(k + 1);
  for (int j = 0; j < k; ++j) {
    const double kv = row.k_values[j];
    if (!std::isfinite(kv) || kv <= 0)
      throw NumericalError("gate: invalid affinity K value");
    exponents[j] = 1.0 / std::max(kv, kAffinityFloor);
  }
  if (cfg.V <= 0) throw ConfigError("gate: V must be positive");
  exponents[k] = 1.0 / cfg.V;
  const double mx = *std::max_element(exponents.begin(), exponents.end());
  double sum = 0;
  std::vector<double> w(k + 1);
  for (int j = 0; j <= k; ++j) {
    w[j] = std::exp(exponents[j] - mx);
    sum += w[j];
  }
  // Dominated entries underflow to 0; keep them strictly positive (the true
  // shares are) without disturbing the 1e-9 simplex tolerance.
  for (double& v : w) v = std::max(v / sum, 1e-300);
  return w;
}

void check_gate_config(const GateConfig& cfg) {
  if (cfg.a <= 0) throw ConfigError("gate: a must be positive");
  if (cfg.V <= 0) throw ConfigError("gate: V must be positive");
  if (cfg.n_total < 2) throw ConfigError("gate: n_total must be >= 2");
}

}  // namespace

double knowledge_affinity(double component_loglik, double replay_loglik) {
  if (!std::isfinite(component_loglik) || !std::isfinite(replay_loglik))
    throw NumericalError("knowledge_affinity: non-finite log-likelihood");
  return std::max(std::abs(component_loglik - replay_loglik), kAffinityFloor);
}

double effective_count(const GateConfig& cfg, const AffinityRow& row, int j) {
  check_gate_config(cfg);
  if (j < 0 || j >= row.component_count())
    throw InputError("effective_count: component index out of range");
  const auto w = weight_shares(cfg, row);
  return static_cast<double>(cfg.n_total - 1) * w[j];
}

std::vector<double> assignment_probs(const GateConfig& cfg, const AffinityRow& row) {
  check_gate_config(cfg);
  const int k = row.component_count();
  const auto w = weight_shares(cfg, row);
  const double n1 = static_cast<double>(cfg.n_total - 1);
  const double denom = n1 + cfg.a;
  std::vector<double> probs(k + 1);
  for (int j = 0; j < k; ++j) probs[j] = n1 * w[j] / denom;
  probs[k] = (cfg.a + n1 * w[k]) / denom;
  return probs;
}

IndicatorDecision task_indicator(const GateConfig& cfg, std::span<const Sample> group,
                                 std::span<const ComponentScorer* const> components,
                                 std::uint64_t seed) {
  if (group.empty()) throw InputError("task_indicator: empty group");
  const int k = static_cast<int>(components.size());
  const int n_g = static_cast<int>(group.size());

  IndicatorDecision decision;
  if (k == 0 || cfg.force_expand) {
    // First task (or forced expansion): NEW by convention.
    decision.probs.assign(k + 1, 0.0);
    decision.probs[k] = 1.0;
    decision.chosen = k;
    decision.per_sample_probs.assign(n_g, decision.probs);
    return decision;
  }

  // Affinity rows: for component j, the i-th group sample is paired with the
  // i-th of n_G fresh replay draws from j.
  std::vector<std::vector<double>> k_matrix(n_g, std::vector<double>(k));
  for (int j = 0; j < k; ++j) {
    RngEngine rng(derive_seed(seed, {0xC0DE, static_cast<std::uint64_t>(j)}));
    std::vector<Sample> replays;
    replays.reserve(n_g);
    for (int i = 0; i < n_g; ++i) replays.push_back(components[j]->generate(rng));
    for (int i = 0; i < n_g; ++i) {
      double f_data, f_replay;
      try {
        f_data = components[j]->log_likelihood(group[i], rng);
        f_replay = components[j]->log_likelihood(replays[i], rng);
      } catch (const std::exception& e) {
        throw NumericalError("task_indicator: component " + std::to_string(j) +
                             " evaluation failed: " + e.what());
      }
      k_matrix[i][j] = knowledge_affinity(f_data, f_replay);
    }
  }

  decision.per_sample_probs.resize(n_g);
  decision.probs.assign(k + 1, 0.0);
  for (int i = 0; i < n_g; ++i) {
    AffinityRow row{k_matrix[i]};
    decision.per_sample_probs[i] = assignment_probs(cfg, row);
    for (int j = 0; j <= k; ++j) decision.probs[j] += decision.per_sample_probs[i][j] / n_g;
  }
  // Argmax with lowest-index tie-break; NEW (last entry) loses ties.
  int best = 0;
  for (int j = 1; j <= k; ++j)
    if (decision.probs[j] > decision.probs[best]) best = j;
  decision.chosen = best;
  return decision;
}

}  // namespace limix
