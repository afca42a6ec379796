#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "limix/errors.hpp"
#include "limix/task_streams.hpp"

using namespace limix;

namespace {

bool same_samples(const std::vector<Sample>& a, const std::vector<Sample>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].label != b[i].label) return false;
    for (std::size_t k = 0; k < a[i].features.size(); ++k)
      if (a[i].features[k] != b[i].features[k]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("generate_task is deterministic in the seed") {
  TaskSpec spec;
  spec.seed = 7;
  spec.geometry_seed = 3;
  spec.n_train = 100;
  spec.n_test = 20;
  const auto a = generate_task(spec);
  const auto b = generate_task(spec);
  CHECK(same_samples(a.train, b.train));
  CHECK(same_samples(a.test, b.test));
  CHECK(a.train.size() == 100);
  CHECK(a.test.size() == 20);
}

TEST_CASE("zero-angle rotation is bit-identical to the base task") {
  TaskSpec base;
  base.seed = 11;
  base.geometry_seed = 5;
  base.n_train = 50;
  base.n_test = 10;
  TaskSpec rotated = base;
  rotated.family = TaskFamily::RotatedFeatures;
  rotated.rotation_deg = 0.0;
  CHECK(same_samples(generate_task(base).train, generate_task(rotated).train));
}

TEST_CASE("permutation followed by its inverse recovers the base features") {
  TaskSpec base;
  base.seed = 13;
  base.geometry_seed = 9;
  base.n_train = 40;
  base.n_test = 5;
  TaskSpec permuted = base;
  permuted.family = TaskFamily::PermutedFeatures;
  permuted.permutation_seed = 99;

  const auto p = permutation_for(permuted);
  std::vector<int> inverse(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inverse[p[i]] = static_cast<int>(i);

  const auto base_data = generate_task(base);
  const auto perm_data = generate_task(permuted);
  for (std::size_t s = 0; s < base_data.train.size(); ++s) {
    // y[i] = x[p[i]], so x[j] must reappear at position inverse[j].
    for (int j = 0; j < base.d_x; ++j)
      CHECK(perm_data.train[s].features[inverse[j]] == base_data.train[s].features[j]);
  }
}

TEST_CASE("labels equal the true labeling function exactly") {
  for (auto family : {TaskFamily::GaussianBlobs, TaskFamily::TwoMoonsVariant,
                      TaskFamily::InvertedFeatures}) {
    TaskSpec spec;
    spec.family = family;
    spec.seed = 17;
    spec.geometry_seed = 21;
    spec.n_train = 200;
    spec.n_test = 1;
    const auto data = generate_task(spec);
    for (const auto& s : data.train) {
      REQUIRE(s.label.has_value());
      CHECK(*s.label == true_label(spec, s.features));
    }
  }
}

TEST_CASE("unsupervised specs omit labels") {
  TaskSpec spec;
  spec.supervised = false;
  spec.seed = 1;
  spec.n_train = 10;
  const auto data = generate_task(spec);
  for (const auto& s : data.train) CHECK(!s.label.has_value());
}

TEST_CASE("configuration errors") {
  TaskSpec spec;
  SUBCASE("d_x too small") {
    spec.d_x = 1;
    CHECK_THROWS_AS(generate_task(spec), ConfigError);
  }
  SUBCASE("empty training set") {
    spec.n_train = 0;
    CHECK_THROWS_AS(generate_task(spec), ConfigError);
  }
  SUBCASE("bad class count") {
    spec.n_classes = 1;
    CHECK_THROWS_AS(generate_task(spec), ConfigError);
  }
  SUBCASE("split with more tasks than classes") {
    StreamParams p;
    p.n_classes = 4;
    CHECK_THROWS_AS(make_stream(StreamKind::SplitAnalog, 5, 1, p), ConfigError);
  }
  SUBCASE("fewer than two tasks") {
    CHECK_THROWS_AS(make_stream(StreamKind::MsfirAnalog, 1, 1, {}), ConfigError);
  }
}

TEST_CASE("msfir-analog: last task is a small rotation of task 1") {
  StreamParams p;
  const auto stream = make_stream(StreamKind::MsfirAnalog, 5, 42, p);
  REQUIRE(stream.size() == 5);
  const auto& first = stream.tasks.front();
  const auto& last = stream.tasks.back();
  CHECK(first.family == TaskFamily::GaussianBlobs);
  CHECK(last.family == TaskFamily::RotatedFeatures);
  CHECK(last.geometry_seed == first.geometry_seed);
  CHECK(last.rotation_deg == doctest::Approx(10.0));
  // Same generating geometry: marginal moments nearly coincide.
  std::vector<double> m1, v1, m2, v2;
  marginal_moments(first, m1, v1);
  marginal_moments(last, m2, v2);
  double shift = 0;
  for (int i = 0; i < first.d_x; ++i) shift += std::abs(m1[i] - m2[i]);
  CHECK(shift < 2.0);  // a 10-degree rotation moves the means only slightly
}

TEST_CASE("permuted-analog tasks are fixed permutations of task 1") {
  const auto stream = make_stream(StreamKind::PermutedAnalog, 3, 7, {});
  CHECK(stream.tasks[0].family == TaskFamily::GaussianBlobs);
  for (int t = 1; t < 3; ++t) {
    CHECK(stream.tasks[t].family == TaskFamily::PermutedFeatures);
    CHECK(stream.tasks[t].geometry_seed == stream.tasks[0].geometry_seed);
  }
  CHECK(stream.tasks[1].permutation_seed != stream.tasks[2].permutation_seed);
}

TEST_CASE("split-analog partitions classes disjointly") {
  StreamParams p;
  p.n_classes = 10;
  const auto stream = make_stream(StreamKind::SplitAnalog, 5, 3, p);
  std::set<int> seen;
  for (const auto& spec : stream.tasks) {
    CHECK(spec.class_subset.size() == 2);  // 10 classes over 5 tasks
    for (int c : spec.class_subset) {
      CHECK(!seen.count(c));
      seen.insert(c);
    }
  }
  CHECK(seen.size() == 10);
  // Labels stay global class indices within each task's subset.
  const auto data = generate_task(stream.tasks[2]);
  for (const auto& s : data.train) {
    bool in_subset = false;
    for (int c : stream.tasks[2].class_subset)
      if (*s.label == c) in_subset = true;
    CHECK(in_subset);
  }
}

TEST_CASE("identical stream seeds give bit-identical streams") {
  const auto a = make_stream(StreamKind::MsfirAnalog, 4, 1234, {});
  const auto b = make_stream(StreamKind::MsfirAnalog, 4, 1234, {});
  REQUIRE(a.size() == b.size());
  for (int t = 0; t < a.size(); ++t)
    CHECK(same_samples(generate_task(a.tasks[t]).train,
                       generate_task(b.tasks[t]).train));
}

TEST_CASE("features are finite and match closed-form marginal moments") {
  StreamParams p;
  p.n_train = 20000;
  p.n_test = 1;
  const auto stream = make_stream(StreamKind::MsfirAnalog, 4, 5, p);
  for (const auto& spec : stream.tasks) {
    const auto data = generate_task(spec);
    std::vector<double> mean, var;
    marginal_moments(spec, mean, var);
    const double n = static_cast<double>(data.train.size());
    for (int i = 0; i < spec.d_x; ++i) {
      double m = 0;
      for (const auto& s : data.train) {
        REQUIRE(std::isfinite(s.features[i]));
        m += s.features[i] / n;
      }
      double v = 0;
      for (const auto& s : data.train)
        v += (s.features[i] - m) * (s.features[i] - m) / (n - 1);
      CAPTURE(family_name(spec.family));
      CAPTURE(i);
      CHECK(std::abs(m - mean[i]) <= 3.0 * std::sqrt(var[i] / n));
      // Sample-variance noise ~ sqrt(2/n) var for Gaussians; mixtures are
      // heavier tailed, so use a wider band.
      CHECK(std::abs(v - var[i]) <= 4.0 * var[i] * std::sqrt(2.0 / n));
    }
  }
}

TEST_CASE("train and test are disjoint draws from one stream") {
  TaskSpec spec;
  spec.seed = 77;
  spec.n_train = 300;
  spec.n_test = 300;
  const auto data = generate_task(spec);
  int collisions = 0;
  for (const auto& a : data.train)
    for (const auto& b : data.test)
      if (a.features == b.features) ++collisions;
  CHECK(collisions == 0);
}
