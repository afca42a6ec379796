#pragma once

#include <string>
#include <vector>

#include "limix/mixture.hpp"

namespace limix {

// The single-model generative-replay baseline: one conditional VAE plus
// classifier, retrained at every task on half new data and half of its own
// pre-task generations. The architecture mirrors exactly one LIMix component
// (trunk + head widths), and the perfect task-inference oracle is realised by
// conditioning generation on a task-provenance code appended to the class
// one-hot.
class GrmModel {
 public:
  GrmModel(ModelConfig cfg, std::uint64_t seed);  // requires cfg.supervised

  // Task 1 trains on pure data; later tasks mix each batch 1:1 with samples
  // generated by the frozen pre-task copy and labeled by its classifier.
  void learn_task(const std::vector<Sample>& train, int task_index, int epochs,
                  const EpochCallback& on_epoch = nullptr);

  // Oracle-filtered generation: draws conditioned on task's provenance code,
  // labeled by this model state's classifier. Throws InputError if the task
  // has not been seen or no (task, class) pairs exist for it.
  std::vector<Sample> generate_for_task(int task, int n, RngEngine& rng) const;

  // The deterministic labeling rule h_sigma(x): classifier argmax at z = 0.
  int classifier_label(const std::vector<double>& x) const;
  std::vector<double> predict(const Sample& x, std::uint64_t seed) const;

  // Supervised generator objective at the sample's label, maximised over the
  // tasks seen so far (used for ELBO-style metrics).
  double loglik(const Sample& x, int n_mc, RngEngine& rng) const;

  MlpView encoder_view(ParamSet* grads = nullptr) const;
  MlpView decoder_view(ParamSet* grads = nullptr) const;
  MlpView classifier_view(ParamSet* grads = nullptr) const;
  std::vector<double> cond_vector(int label, int task_code) const;

  void save(const std::string& path) const;
  static GrmModel load(const std::string& path);

  ModelConfig config;
  ParamSet params;  // single component; everything retrained each task
  int tasks_seen = 0;
  std::vector<std::pair<int, int>> seen_pairs;  // (task, class) from real data
  std::uint64_t model_seed = 0;
};

}  // namespace limix
