#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "limix/rng.hpp"

namespace limix {

struct Sample {
  std::vector<double> features;
  std::optional<int> label;  // present iff the stream is supervised
};

enum class TaskFamily {
  GaussianBlobs,
  TwoMoonsVariant,
  PermutedFeatures,
  RotatedFeatures,
  InvertedFeatures,
};

const char* family_name(TaskFamily f);

// A self-contained recipe for one task's data distribution. Derived families
// (permuted / rotated / inverted) transform a Gaussian-blob base whose class
// geometry comes from geometry_seed.
struct TaskSpec {
  TaskFamily family = TaskFamily::GaussianBlobs;
  std::uint64_t seed = 0;            // sample-draw stream
  int n_train = 2000;
  int n_test = 500;
  int d_x = 8;
  int n_classes = 4;
  std::uint64_t geometry_seed = 0;   // class means / moon frame
  double rotation_deg = 0.0;         // RotatedFeatures only
  std::uint64_t permutation_seed = 0;  // PermutedFeatures only
  std::vector<double> offset;        // translation applied last (empty = none)
  std::vector<int> class_subset;     // split streams; empty = all classes
  bool supervised = true;

  void validate() const;  // throws ConfigError
};

struct TaskData {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

// Deterministic in spec (train and test are disjoint draws from one stream).
TaskData generate_task(const TaskSpec& spec);

// Feature permutation used by a PermutedFeatures spec.
std::vector<int> permutation_for(const TaskSpec& spec);

// The true labeling function h*: nearest transformed class mean (blob-based
// families) or nearest moon arc. Labels emitted by generate_task satisfy
// label == true_label(spec, features) exactly.
int true_label(const TaskSpec& spec, const std::vector<double>& x);

// Closed-form marginal mean and per-dimension variance of the feature
// distribution; used by the moment-matching property tests.
void marginal_moments(const TaskSpec& spec, std::vector<double>& mean,
                      std::vector<double>& var);

struct TaskStream {
  std::vector<TaskSpec> tasks;
  bool supervised = true;
  int current_index = 0;  // tasks learnt so far; boundaries known at train time

  int size() const { return static_cast<int>(tasks.size()); }
};

enum class StreamKind { MsfirAnalog, PermutedAnalog, SplitAnalog };

StreamKind stream_kind_from_string(const std::string& s);  // throws ConfigError
const char* stream_kind_name(StreamKind k);

struct StreamParams {
  int d_x = 8;
  int n_classes = 4;
  int n_train = 2000;
  int n_test = 500;
  bool supervised = true;
  double rotation_deg = 10.0;  // angle of the near-copy task in msfir-analog
};

// msfir-analog: diverse far-apart families, the last task a small rotation of
// task 1. permuted-analog: fixed feature permutations of task 1. split-analog:
// disjoint class groups per task.
TaskStream make_stream(StreamKind kind, int n_tasks, std::uint64_t seed,
                       const StreamParams& params = {});

}  // namespace limix
