#include "limix/task_streams.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "limix/errors.hpp"

namespace limix {

namespace {

constexpr double kBlobMeanSpread = 2.0;   // class means ~ N(0, spread^2 I)
constexpr double kBlobMinSeparation = 4.0;  // rejection floor on pairwise mean distance
constexpr double kMoonRadius = 3.0;
constexpr int kMoonArcPoints = 257;

// Class means for a blob geometry; regenerated as a whole until all pairwise
// distances clear the separation floor.
std::vector<std::vector<double>> blob_means(std::uint64_t geometry_seed, int n_classes,
                                            int d_x) {
  RngEngine g(geometry_seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<std::vector<double>> means(n_classes, std::vector<double>(d_x));
    for (auto& m : means)
      for (double& v : m) v = kBlobMeanSpread * normal01(g);
    bool ok = true;
    for (int a = 0; a < n_classes && ok; ++a)
      for (int b = a + 1; b < n_classes && ok; ++b) {
        double d2 = 0;
        for (int k = 0; k < d_x; ++k) {
          const double diff = means[a][k] - means[b][k];
          d2 += diff * diff;
        }
        if (d2 < kBlobMinSeparation * kBlobMinSeparation) ok = false;
      }
    if (ok) return means;
  }
  throw ConfigError("blob geometry: could not separate " + std::to_string(n_classes) +
                    " classes in " + std::to_string(d_x) + " dimensions");
}

bool is_blob_based(TaskFamily f) { return f != TaskFamily::TwoMoonsVariant; }

// Applies the family transform in place (blob-based families only).
void apply_transform(const TaskSpec& spec, const std::vector<int>& perm,
                     std::vector<double>& x) {
  switch (spec.family) {
    case TaskFamily::GaussianBlobs:
    case TaskFamily::TwoMoonsVariant:
      break;
    case TaskFamily::PermutedFeatures: {
      std::vector<double> y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[perm[i]];
      x = std::move(y);
      break;
    }
    case TaskFamily::RotatedFeatures: {
      const double a = spec.rotation_deg * kPi / 180.0;
      const double c = std::cos(a), s = std::sin(a);
      const double x0 = x[0], x1 = x[1];
      x[0] = c * x0 - s * x1;
      x[1] = s * x0 + c * x1;
      break;
    }
    case TaskFamily::InvertedFeatures:
      for (double& v : x) v = -v;
      break;
  }
}

void add_offset(const TaskSpec& spec, std::vector<double>& x) {
  if (spec.offset.empty()) return;
  for (int i = 0; i < spec.d_x; ++i) x[i] += spec.offset[i];
}

// Transformed class means (the blob geometry pushed through the family
// transform and offset); h* is nearest-neighbour on these.
std::vector<std::vector<double>> effective_means(const TaskSpec& spec) {
  auto means = blob_means(spec.geometry_seed, spec.n_classes, spec.d_x);
  const auto perm = spec.family == TaskFamily::PermutedFeatures ? permutation_for(spec)
                                                                : std::vector<int>{};
  for (auto& m : means) {
    apply_transform(spec, perm, m);
    add_offset(spec, m);
  }
  return means;
}

std::vector<double> moon_arc_point(int moon, double theta) {
  if (moon == 0)
    return {kMoonRadius * std::cos(theta), kMoonRadius * std::sin(theta)};
  return {kMoonRadius * (1.0 - std::cos(theta)), kMoonRadius * (0.5 - std::sin(theta))};
}

std::vector<int> active_classes(const TaskSpec& spec) {
  if (!spec.class_subset.empty()) return spec.class_subset;
  const int c_max = spec.family == TaskFamily::TwoMoonsVariant ? 2 : spec.n_classes;
  std::vector<int> all(c_max);
  std::iota(all.begin(), all.end(), 0);
  return all;
}

}  // namespace

const char* family_name(TaskFamily f) {
  switch (f) {
    case TaskFamily::GaussianBlobs: return "gaussian-blobs";
    case TaskFamily::TwoMoonsVariant: return "two-moons-variant";
    case TaskFamily::PermutedFeatures: return "permuted-features";
    case TaskFamily::RotatedFeatures: return "rotated-features";
    case TaskFamily::InvertedFeatures: return "inverted-features";
  }
  return "?";
}

void TaskSpec::validate() const {
  if (n_train < 1 || n_test < 1)
    throw ConfigError("task spec: n_train and n_test must be >= 1");
  if (d_x < 2) throw ConfigError("task spec: d_x must be >= 2");
  if (n_classes < 2) throw ConfigError("task spec: n_classes must be >= 2");
  if (!offset.empty() && static_cast<int>(offset.size()) != d_x)
    throw ConfigError("task spec: offset length must equal d_x");
  for (int c : class_subset)
    if (c < 0 || c >= n_classes)
      throw ConfigError("task spec: class_subset entry out of range");
}

std::vector<int> permutation_for(const TaskSpec& spec) {
  std::vector<int> p(spec.d_x);
  std::iota(p.begin(), p.end(), 0);
  RngEngine g(spec.permutation_seed);
  for (int i = spec.d_x - 1; i > 0; --i)
    std::swap(p[i], p[uniform_int(g, i + 1)]);
  return p;
}

int true_label(const TaskSpec& spec, const std::vector<double>& x) {
  if (spec.family == TaskFamily::TwoMoonsVariant) {
    double best = 0;
    int best_label = 0;
    bool first = true;
    for (int moon = 0; moon < 2; ++moon) {
      for (int k = 0; k < kMoonArcPoints; ++k) {
        const double theta = kPi * k / (kMoonArcPoints - 1);
        auto p = moon_arc_point(moon, theta);
        double d2 = 0;
        for (int i = 0; i < spec.d_x; ++i) {
          const double pi = i < 2 ? p[i] : 0.0;
          const double oi = spec.offset.empty() ? 0.0 : spec.offset[i];
          const double diff = x[i] - pi - oi;
          d2 += diff * diff;
        }
        if (first || d2 < best) {
          best = d2;
          best_label = moon;
          first = false;
        }
      }
    }
    return best_label;
  }
  const auto means = effective_means(spec);
  const auto classes = active_classes(spec);
  double best = 0;
  int best_label = classes.front();
  bool first = true;
  for (int c : classes) {
    double d2 = 0;
    for (int i = 0; i < spec.d_x; ++i) {
      const double diff = x[i] - means[c][i];
      d2 += diff * diff;
    }
    if (first || d2 < best) {
      best = d2;
      best_label = c;
      first = false;
    }
  }
  return best_label;
}

TaskData generate_task(const TaskSpec& spec) {
  spec.validate();
  const auto classes = active_classes(spec);
  const auto means = is_blob_based(spec.family)
                         ? blob_means(spec.geometry_seed, spec.n_classes, spec.d_x)
                         : std::vector<std::vector<double>>{};
  const auto perm = spec.family == TaskFamily::PermutedFeatures ? permutation_for(spec)
                                                                : std::vector<int>{};
  RngEngine g(spec.seed);
  auto draw = [&]() {
    Sample s;
    s.features.resize(spec.d_x);
    const int c = classes[uniform_int(g, static_cast<int>(classes.size()))];
    if (spec.family == TaskFamily::TwoMoonsVariant) {
      const double theta = kPi * uniform01(g);
      const auto p = moon_arc_point(c, theta);
      for (int i = 0; i < spec.d_x; ++i)
        s.features[i] = (i < 2 ? p[i] : 0.0) + normal01(g);
    } else {
      for (int i = 0; i < spec.d_x; ++i) s.features[i] = means[c][i] + normal01(g);
      apply_transform(spec, perm, s.features);
    }
    add_offset(spec, s.features);
    if (spec.supervised) s.label = true_label(spec, s.features);
    return s;
  };
  TaskData data;
  data.train.reserve(spec.n_train);
  data.test.reserve(spec.n_test);
  for (int i = 0; i < spec.n_train; ++i) data.train.push_back(draw());
  for (int i = 0; i < spec.n_test; ++i) data.test.push_back(draw());
  return data;
}

void marginal_moments(const TaskSpec& spec, std::vector<double>& mean,
                      std::vector<double>& var) {
  mean.assign(spec.d_x, 0.0);
  var.assign(spec.d_x, 1.0);  // unit noise on every axis
  if (spec.family == TaskFamily::TwoMoonsVariant) {
    const double r = kMoonRadius;
    // Arc moments over theta ~ U[0, pi]: E cos = 0, E sin = 2/pi,
    // E cos^2 = E sin^2 = 1/2.
    const double e_sin = 2.0 / kPi;
    const double m0[2] = {0.0, r * e_sin};
    const double m1[2] = {r, r * (0.5 - e_sin)};
    const double sq0[2] = {r * r * 0.5, r * r * 0.5};
    const double sq1[2] = {r * r * 1.5, r * r * (0.75 - e_sin)};
    for (int i = 0; i < 2; ++i) {
      mean[i] = 0.5 * (m0[i] + m1[i]);
      var[i] = 1.0 + 0.5 * (sq0[i] + sq1[i]) - mean[i] * mean[i];
    }
    if (!spec.offset.empty())
      for (int i = 0; i < spec.d_x; ++i) mean[i] += spec.offset[i];
  } else {
    // Effective means already include transform and offset; the unit noise is
    // isotropic so permutation/rotation/negation leave it untouched.
    const auto means = effective_means(spec);
    const auto classes = active_classes(spec);
    const double w = 1.0 / static_cast<double>(classes.size());
    for (int i = 0; i < spec.d_x; ++i) {
      double m = 0, m2 = 0;
      for (int c : classes) {
        m += w * means[c][i];
        m2 += w * means[c][i] * means[c][i];
      }
      mean[i] = m;
      var[i] = 1.0 + m2 - m * m;
    }
  }
}

StreamKind stream_kind_from_string(const std::string& s) {
  if (s == "msfir-analog") return StreamKind::MsfirAnalog;
  if (s == "permuted-analog") return StreamKind::PermutedAnalog;
  if (s == "split-analog") return StreamKind::SplitAnalog;
  throw ConfigError("unknown stream kind: " + s);
}

const char* stream_kind_name(StreamKind k) {
  switch (k) {
    case StreamKind::MsfirAnalog: return "msfir-analog";
    case StreamKind::PermutedAnalog: return "permuted-analog";
    case StreamKind::SplitAnalog: return "split-analog";
  }
  return "?";
}

TaskStream make_stream(StreamKind kind, int n_tasks, std::uint64_t seed,
                       const StreamParams& params) {
  if (n_tasks < 2) throw ConfigError("make_stream: n_tasks must be >= 2");
  TaskStream stream;
  stream.supervised = params.supervised;

  auto base_spec = [&](TaskFamily family, int task_idx) {
    TaskSpec s;
    s.family = family;
    s.seed = derive_seed(seed, {100, static_cast<std::uint64_t>(task_idx)});
    s.n_train = params.n_train;
    s.n_test = params.n_test;
    s.d_x = params.d_x;
    s.n_classes = params.n_classes;
    s.supervised = params.supervised;
    return s;
  };
  const std::uint64_t g1 = derive_seed(seed, {1});

  switch (kind) {
    case StreamKind::MsfirAnalog: {
      auto first = base_spec(TaskFamily::GaussianBlobs, 0);
      first.geometry_seed = g1;
      stream.tasks.push_back(first);
      // Middle tasks: mutually far-apart domains on distinct offset axes.
      for (int t = 1; t < n_tasks - 1; ++t) {
        const int m = t - 1;
        TaskFamily fam = m % 3 == 0 ? TaskFamily::TwoMoonsVariant
                         : m % 3 == 1 ? TaskFamily::GaussianBlobs
                                      : TaskFamily::InvertedFeatures;
        auto spec = base_spec(fam, t);
        spec.geometry_seed = fam == TaskFamily::TwoMoonsVariant
                                 ? g1
                                 : derive_seed(seed, {2, static_cast<std::uint64_t>(m)});
        const int n_axes = params.d_x - 2;
        const int axis = 2 + m % n_axes;
        const int layer = m / n_axes;
        spec.offset.assign(params.d_x, 0.0);
        spec.offset[axis] = (layer % 2 == 0 ? 1.0 : -1.0) * (12.0 + 6.0 * layer * layer);
        stream.tasks.push_back(spec);
      }
      // Last task: a near-copy of task 1 (the RMNIST-after-MNIST event).
      auto last = base_spec(TaskFamily::RotatedFeatures, n_tasks - 1);
      last.geometry_seed = g1;
      last.rotation_deg = params.rotation_deg;
      stream.tasks.push_back(last);
      break;
    }
    case StreamKind::PermutedAnalog: {
      auto first = base_spec(TaskFamily::GaussianBlobs, 0);
      first.geometry_seed = g1;
      stream.tasks.push_back(first);
      for (int t = 1; t < n_tasks; ++t) {
        auto spec = base_spec(TaskFamily::PermutedFeatures, t);
        spec.geometry_seed = g1;
        spec.permutation_seed = derive_seed(seed, {3, static_cast<std::uint64_t>(t)});
        stream.tasks.push_back(spec);
      }
      break;
    }
    case StreamKind::SplitAnalog: {
      if (n_tasks > params.n_classes)
        throw ConfigError("split-analog: n_tasks exceeds available class partitions (" +
                          std::to_string(params.n_classes) + " classes)");
      const int base = params.n_classes / n_tasks;
      const int extra = params.n_classes % n_tasks;
      int next_class = 0;
      for (int t = 0; t < n_tasks; ++t) {
        auto spec = base_spec(TaskFamily::GaussianBlobs, t);
        spec.geometry_seed = g1;
        const int count = base + (t < extra ? 1 : 0);
        for (int c = 0; c < count; ++c) spec.class_subset.push_back(next_class++);
        stream.tasks.push_back(spec);
      }
      break;
    }
  }
  return stream;
}

}  // namespace limix
