#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "limix/dp_gate.hpp"
#include "limix/nn.hpp"
#include "limix/objectives.hpp"
#include "limix/task_streams.hpp"

namespace limix {

struct ModelConfig {
  int d_x = 8;
  int d_z = 4;
  int hidden = 64;
  int n_classes = 4;
  bool supervised = true;
  int task_code_dim = 8;  // task-provenance conditioning slots (supervised)
  double lr = 1e-3;
  int batch_size = 64;
  int n_mc_train = 1;
  int n_mc_eval = 16;
  int gate_n_mc = 2;  // MC draws per gate log-likelihood evaluation

  int cond_dim() const { return supervised ? n_classes + task_code_dim : 0; }
  void validate() const;
};

// One mixing component: individual encoder/decoder heads (and classifier in
// supervised mode) on top of the shared trunk.
struct Component {
  ParamSet indiv;
  std::vector<int> tasks_served;
  // (task, class) pairs observed in training data; replay conditioning is
  // drawn uniformly from these. Unused in unsupervised mode.
  std::vector<std::pair<int, int>> seen_pairs;
};

struct LearnRecord {
  int task_index = 0;
  int chosen_component = 0;  // after expansion, the trained component's index
  bool expanded = false;
  std::vector<double> gate_probs;  // K+1 entries at decision time (NEW last)
};

struct EvalRow {
  int task = 0;
  int component_chosen = 0;  // gate decision recorded for this task
  double mse = 0;
  double elbo = 0;
  std::optional<double> accuracy;
};

struct SelectionDetail {
  int component = 0;
  int task_code = 0;   // best served task under the component's likelihood
  int label_guess = 0; // best label when the query is unlabeled
};

// A single compact density model distilled from the mixture; shares the
// trunk and mirrors one component's head architecture. Unsupervised only.
struct StudentModel {
  ParamSet indiv;
};

using EpochCallback = std::function<void(int epoch)>;

class Mixture {
 public:
  Mixture(ModelConfig cfg, GateConfig gate, std::uint64_t seed);

  // Gate-driven training of one task: expands or reuses exactly one
  // component; reuse augments every mini-batch 1:1 with the component's own
  // frozen-copy replay. Throws DivergenceError on non-finite loss.
  LearnRecord learn_task(const std::vector<Sample>& train, int task_index, int epochs,
                         const EpochCallback& on_epoch = nullptr);

  // Test-time routing over existing components only (no NEW at test time).
  int select_component(const Sample& x, std::uint64_t seed) const;
  SelectionDetail select_detail(const Sample& x, std::uint64_t seed) const;

  // Routed class probabilities (supervised only; ModeError otherwise).
  std::vector<double> predict(const Sample& x, std::uint64_t seed) const;

  // Routed encode-decode with the posterior mean; returns (x_hat, MSE).
  std::pair<std::vector<double>, double> reconstruct(const Sample& x,
                                                     std::uint64_t seed) const;

  // Component log-likelihood F: the ELBO, or the conditional generator
  // objective (maximised over the component's served task codes) when
  // supervised.
  double component_loglik(int j, const Sample& x, int n_mc, RngEngine& rng) const;

  // Fresh replay draws from component j (decoder means; labels attached in
  // supervised mode).
  std::vector<Sample> replay(int j, int n, RngEngine& rng) const;

  // Task-provenance-conditioned generation from component j, labeled by its
  // classifier head (supervised only). Throws InputError when the component
  // holds no (task, class) pairs for the requested task.
  std::vector<Sample> generate_for_task(int j, int task, int n, RngEngine& rng) const;

  // Per-task metrics over the test splits of every task learnt so far.
  std::vector<EvalRow> evaluate_stream(const TaskStream& stream, int tasks_learnt,
                                       std::uint64_t eval_seed) const;
  EvalRow evaluate_task(const TaskSpec& spec, int task_index,
                        std::uint64_t eval_seed) const;

  // Student distillation (unsupervised mixtures only): current-task data plus
  // fresh replay from every component each epoch, trunk frozen.
  StudentModel make_student(std::uint64_t seed) const;
  void distill_student(StudentModel& student, const std::vector<Sample>& current_train,
                       int n_replay_per_component, int epochs, RngEngine& rng) const;
  double student_elbo(const StudentModel& student, const Sample& x, int n_mc,
                      RngEngine& rng) const;

  int component_count() const { return static_cast<int>(components.size()); }

  void save(const std::string& path) const;
  static Mixture load(const std::string& path);

  ModelConfig config;
  GateConfig gate;
  ParamSet shared;  // encoder/decoder trunks; trained with the first task only
  std::vector<Component> components;
  std::vector<LearnRecord> history;
  std::uint64_t model_seed = 0;

  // Bound views for component j (grads optional).
  MlpView encoder_view(int j, ParamSet* gshared = nullptr, ParamSet* gind = nullptr) const;
  MlpView decoder_view(int j, ParamSet* gshared = nullptr, ParamSet* gind = nullptr) const;
  MlpView classifier_view(int j, ParamSet* gind = nullptr) const;

  std::vector<double> cond_vector(int label, int task_code) const;

 private:
  Component fresh_component();
  void train_component(int j, const std::vector<Sample>& train, bool train_shared,
                       bool with_replay, int task_index, int epochs,
                       const EpochCallback& on_epoch);
};

}  // namespace limix
