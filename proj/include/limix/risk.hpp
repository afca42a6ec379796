#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "limix/task_streams.hpp"

namespace limix {

using FeatureVec = std::vector<double>;

struct LabeledPoint {
  FeatureVec x;
  int y = 0;
};

using Classifier = std::function<int(const FeatureVec&)>;

enum class LossKind { ZeroOne, BoundedAbsolute };

// Symmetric, bounded by 1, satisfies the triangle inequality.
double tau_loss(LossKind kind, int y1, int y2);

// A sampleable joint distribution over (x, y): either a real task split or a
// model-generated chain approximation. Handles may alternatively carry an
// exact finite support, in which case the exact_* operations apply.
class DistHandle {
 public:
  enum class Kind { RealTask, ModelChain };

  Kind kind = Kind::RealTask;
  int task = 0;
  int generation = 0;  // k in S~_i^(k); 0 denotes the true distribution S_i

  std::function<std::vector<LabeledPoint>(int n, std::uint64_t seed)> sampler;

  struct Support {
    std::vector<LabeledPoint> points;
    std::vector<double> prob;
  };
  std::optional<Support> support;
  std::optional<Classifier> true_label;  // h* (or the snapshot labeling rule)

  std::vector<LabeledPoint> draw(int n, std::uint64_t seed) const;
  bool exact() const { return support.has_value(); }
};

// Resamples (with replacement) from a fixed set of labeled samples.
DistHandle handle_from_samples(std::vector<Sample> samples, int task, int generation);
// Fresh draws from a task's generating distribution; true_label = h*.
DistHandle handle_from_spec(const TaskSpec& spec, int task);
// Exact finite-support handle.
DistHandle handle_from_support(std::vector<LabeledPoint> points, std::vector<double> prob,
                               int task, int generation);

double empirical_risk(const Classifier& h, const DistHandle& dist, int n,
                      std::uint64_t seed);
double disagreement_risk(const Classifier& h1, const Classifier& h2,
                         const DistHandle& dist, int n, std::uint64_t seed,
                         LossKind kind = LossKind::ZeroOne);
// Exact expectations over a finite-support handle.
double exact_risk(const Classifier& h, const DistHandle& dist,
                  LossKind kind = LossKind::ZeroOne);
double exact_disagreement(const Classifier& h1, const Classifier& h2,
                          const DistHandle& dist, LossKind kind = LossKind::ZeroOne);

struct HypothesisClass {
  enum class Family { Linear, Mlp1 };
  Family family = Family::Linear;
  int d_x = 2;
  int n_classes = 2;
  int width = 16;            // Mlp1 hidden width
  double param_bound = 25.0; // box constraint on every parameter
  LossKind tau = LossKind::ZeroOne;

  int param_count() const;
};

// A classifier living inside a HypothesisClass, identified by its flat
// parameter vector; prediction is the logit argmax.
struct ParamClassifier {
  HypothesisClass H;
  std::vector<double> params;

  std::vector<double> logits(const FeatureVec& x) const;
  int predict(const FeatureVec& x) const;
};

Classifier as_classifier(ParamClassifier c);

struct PsiBudget {
  int restarts = 8;
  int steps = 300;
  int n_eval = 1000;  // sample size per side when handles are not exact
  std::uint64_t seed = 0;
};

struct PsiResult {
  double estimate = 0;  // hard zero-one value of the certificate pair
  ParamClassifier h, h_prime;
};

// Adversarial lower-bound estimate of the discrepancy distance
//   sup_{(h,h') in H^2} |E_A tau(h'(x), h(x)) - E_B tau(h'(x), h(x))|
// via multi-restart gradient ascent on a smoothed disagreement surrogate.
// Labels are ignored (marginals only). The same evaluation points are used
// for both sides, so identical handles give exactly zero, and re-evaluating
// the certificate reproduces the estimate.
PsiResult discrepancy(const DistHandle& A, const DistHandle& B,
                      const HypothesisClass& H, const PsiBudget& budget);
// Recomputes the hard objective of a fixed pair on the budget's evaluation
// points (certificate replay).
double evaluate_discrepancy_pair(const DistHandle& A, const DistHandle& B,
                                 const ParamClassifier& h, const ParamClassifier& h_prime,
                                 const PsiBudget& budget);

// Exhaustive-enumeration oracle over an explicit finite class; exact over
// finite-support handles.
double discrepancy_enumerated(const DistHandle& A, const DistHandle& B,
                              const std::vector<ParamClassifier>& grid);
// Grids of binary classifiers: 1-D thresholds (both polarities) or 2-D
// oriented half-planes (angles x offsets).
std::vector<ParamClassifier> classifier_grid(int d_x, double lo, double hi,
                                             int resolution);

struct CombinedError {
  double first_term = 0;   // R'(h*, h_A, A)
  double second_term = 0;  // R'(h_A, h_B, B)
  double total = 0;
};
CombinedError combined_error(const Classifier& hA, const Classifier& hB,
                             const Classifier& hStar, const DistHandle& A,
                             const DistHandle& B, int n, std::uint64_t seed);

// Approximate argmin_{h in H} R(h, dist): cross-entropy training on n_draws
// (or the exact support), measured with tau at prediction time.
ParamClassifier train_ideal(const DistHandle& dist, const HypothesisClass& H,
                            int n_draws, int steps, std::uint64_t seed);

struct AnalysisBudget {
  PsiBudget psi;
  int ideal_draws = 5000;
  int ideal_steps = 300;
  int risk_n = 2000;
  std::uint64_t seed = 0;
};

struct ChainLink {
  int k = 0;
  double psi = 0;
  double sigma_first = 0;   // R'(h~_k, h~*_k, S~^k)
  double sigma_second = 0;  // R'(h~_k, h~_{k+1}, S~^{k+1})
  double sigma = 0;
};

struct BoundChainReport {
  int task = 0;
  double lhs_risk = 0;   // measured target risk R(h, S_i)
  double head_term = 0;  // R'(h, h~_last, S~^(last))
  double rhs_total = 0;
  bool violated = false;  // LHS > RHS; legitimate since Psi is a lower bound
  std::vector<ChainLink> links;
};

// The accumulated-error decomposition: chain = [S_i = S~^(0), S~^(1), ...].
BoundChainReport bound_chain(int task, const std::vector<DistHandle>& chain,
                             const HypothesisClass& H, const Classifier& h,
                             const AnalysisBudget& budget);

// Task bookkeeping: B = tasks whose representation was accessed only once,
// B' = retrained tasks, Bhat = their retrain counts (+1).
struct BoundLedger {
  int K = 0;
  int t = 0;
  std::vector<int> B;
  std::vector<int> Bprime;
  std::vector<int> Bhat;

  void validate() const;  // throws InputError on inconsistency
};

BoundLedger ledger_from_history(const std::vector<std::vector<int>>& tasks_per_component,
                                int n_tasks);

// v = (K - card(B)) / (K - card(B')); throws InputError when K == card(B').
double trade_off_ratio(const BoundLedger& ledger);

// Sum of per-task RHS totals, validated against the ledger's chain lengths.
double lifelong_total(const std::vector<BoundChainReport>& reports,
                      const BoundLedger& ledger);

struct LifelongTotals {
  double single_total = 0;
  double mixture_total = 0;
};
LifelongTotals lifelong_totals(const std::vector<BoundChainReport>& single_reports,
                               const BoundLedger& single_ledger,
                               const std::vector<BoundChainReport>& mixture_reports,
                               const BoundLedger& mixture_ledger);

}  // namespace limix
