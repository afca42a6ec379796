#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "limix/dp_gate.hpp"
#include "limix/errors.hpp"

using namespace limix;

namespace {

// Scorer with fixed data/replay log-likelihoods; replay draws are constant.
class FixedScorer : public ComponentScorer {
 public:
  FixedScorer(double data_ll, double replay_ll) : data_(data_ll), replay_(replay_ll) {}
  double log_likelihood(const Sample& s, RngEngine&) const override {
    return s.label && *s.label == -7 ? replay_ : data_;
  }
  Sample generate(RngEngine&) const override {
    Sample s;
    s.features = {0.0, 0.0};
    s.label = -7;  // marks replay draws for this fixed-likelihood stub
    return s;
  }

 private:
  double data_, replay_;
};

std::vector<Sample> make_group(int n) {
  std::vector<Sample> g(n);
  for (auto& s : g) s.features = {1.0, 2.0};
  return g;
}

GateConfig cfg_with(double a, double v, std::int64_t n_total) {
  GateConfig c;
  c.a = a;
  c.V = v;
  c.n_total = n_total;
  return c;
}

}  // namespace

TEST_CASE("knowledge affinity") {
  CHECK(knowledge_affinity(-3.2, -3.2) == kAffinityFloor);
  CHECK(knowledge_affinity(-10.0, -4.0) == doctest::Approx(6.0));
  CHECK(knowledge_affinity(-4.0, -10.0) == knowledge_affinity(-10.0, -4.0));
  CHECK_THROWS_AS(knowledge_affinity(std::nan(""), 0.0), NumericalError);
}

TEST_CASE("effective count") {
  SUBCASE("equal exponents split the mass evenly") {
    // K -> inf and V -> inf: both exponents tend to 1.
    const AffinityRow row{{1e15}};
    const auto cfg = cfg_with(1.0, 1e15, 101);
    CHECK(effective_count(cfg, row, 0) == doctest::Approx(50.0).epsilon(1e-12));
  }
  SUBCASE("vanishing affinity captures all the mass") {
    const AffinityRow row{{kAffinityFloor}};
    const auto cfg = cfg_with(1.0, 1.0, 101);
    CHECK(effective_count(cfg, row, 0) == doctest::Approx(100.0).epsilon(1e-9));
  }
  SUBCASE("two components, direct arithmetic oracle") {
    // K values (0.5, 1.0), V = 1, n = 11: exponents e^2, e^1, e^1.
    const AffinityRow row{{0.5, 1.0}};
    const auto cfg = cfg_with(1.0, 1.0, 11);
    const double e2 = std::exp(2.0), e1 = std::exp(1.0);
    const double oracle = 10.0 * e2 / (e2 + e1 + e1);
    CHECK(effective_count(cfg, row, 0) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(effective_count(cfg, row, 1) ==
          doctest::Approx(10.0 * e1 / (e2 + 2 * e1)).epsilon(1e-12));
  }
  SUBCASE("soft counts plus the new-component share sum to n-1") {
    const AffinityRow row{{0.7, 2.0, 5.0}};
    const auto cfg = cfg_with(2.0, 1.5, 57);
    double total = 0;
    for (int j = 0; j < 3; ++j) total += effective_count(cfg, row, j);
    const auto probs = assignment_probs(cfg, row);
    const double new_mass = probs.back() * (cfg.n_total - 1 + cfg.a) - cfg.a;
    CHECK(total + new_mass == doctest::Approx(56.0).epsilon(1e-9));
  }
  SUBCASE("index out of range") {
    const AffinityRow row{{0.5}};
    CHECK_THROWS_AS(effective_count(cfg_with(1, 1, 10), row, 1), InputError);
  }
}

TEST_CASE("assignment probabilities") {
  SUBCASE("K=1 equal-affinity case is exactly (50/101, 51/101)") {
    const AffinityRow row{{2.0}};
    const auto probs = assignment_probs(cfg_with(1.0, 2.0, 101), row);
    REQUIRE(probs.size() == 2);
    CHECK(probs[0] == 50.0 / 101.0);
    CHECK(probs[1] == 51.0 / 101.0);
  }
  SUBCASE("a -> infinity forces NEW regardless of affinities") {
    const AffinityRow row{{0.01, 0.5}};
    const auto probs = assignment_probs(cfg_with(1e12, 1.0, 101), row);
    CHECK(probs.back() > 0.999999);
  }
  SUBCASE("K=2 vector matches brute-force evaluation") {
    const AffinityRow row{{0.5, 1.0}};
    const auto cfg = cfg_with(1.0, 1.0, 11);
    const auto probs = assignment_probs(cfg, row);
    // Independent arithmetic straight from the definitions.
    const double z = std::exp(2.0) + std::exp(1.0) + std::exp(1.0);
    const double n1 = 10.0;
    const double denom = n1 + 1.0;
    CHECK(probs[0] == doctest::Approx(n1 * std::exp(2.0) / z / denom).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(n1 * std::exp(1.0) / z / denom).epsilon(1e-12));
    CHECK(probs[2] ==
          doctest::Approx((1.0 + n1 * std::exp(1.0) / z) / denom).epsilon(1e-12));
  }
  SUBCASE("simplex over a randomized configuration matrix") {
    RngEngine rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
      const int k = 1 + uniform_int(rng, 8);
      AffinityRow row;
      for (int j = 0; j < k; ++j)
        row.k_values.push_back(std::exp(4.0 * normal01(rng)));
      const auto cfg = cfg_with(std::exp(2.0 * normal01(rng)),
                                std::exp(2.0 * normal01(rng)),
                                2 + uniform_int(rng, 1000000));
      const auto probs = assignment_probs(cfg, row);
      double sum = 0;
      for (double p : probs) {
        CHECK(p > 0.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
  SUBCASE("requires n_total >= 2") {
    const AffinityRow row{{1.0}};
    CHECK_THROWS_AS(assignment_probs(cfg_with(1.0, 1.0, 1), row), ConfigError);
  }
}

TEST_CASE("gate monotonicity properties") {
  RngEngine rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    AffinityRow row;
    const int k = 2 + uniform_int(rng, 4);
    for (int j = 0; j < k; ++j) row.k_values.push_back(0.1 + 5.0 * uniform01(rng));
    const auto cfg = cfg_with(0.5 + 2.0 * uniform01(rng), 0.2 + 3.0 * uniform01(rng),
                              100 + uniform_int(rng, 10000));

    SUBCASE("") {}
    const auto base = assignment_probs(cfg, row);

    // Decreasing K_ij never decreases p(c=j).
    AffinityRow closer = row;
    closer.k_values[0] *= 0.5;
    CHECK(assignment_probs(cfg, closer)[0] >= base[0] - 1e-12);

    // Increasing a never decreases p(NEW).
    auto bigger_a = cfg;
    bigger_a.a *= 3.0;
    CHECK(assignment_probs(bigger_a, row).back() >= base.back() - 1e-12);

    // Increasing V never increases p(NEW): exp(1/V) shrinks as V grows, so a
    // larger expansion constant makes the gate more conservative.
    auto bigger_v = cfg;
    bigger_v.V *= 3.0;
    CHECK(assignment_probs(bigger_v, row).back() <= base.back() + 1e-12);
  }
}

TEST_CASE("task indicator") {
  SUBCASE("no components yields NEW by convention") {
    const auto group = make_group(4);
    const auto decision =
        task_indicator(cfg_with(1.0, 1.0, 2), group, {}, 99);
    CHECK(decision.is_new());
    CHECK(decision.probs.size() == 1);
    CHECK(decision.probs[0] == 1.0);
    CHECK(decision.per_sample_probs.size() == 4);
  }
  SUBCASE("empty group is rejected") {
    CHECK_THROWS_AS(task_indicator(cfg_with(1, 1, 10), {}, {}, 1), InputError);
  }
  SUBCASE("identical per-sample rows average to any single row") {
    FixedScorer s1(-2.0, -2.5), s2(-9.0, -1.0);
    std::vector<const ComponentScorer*> comps{&s1, &s2};
    const auto group = make_group(8);
    const auto decision = task_indicator(cfg_with(1.0, 1.0, 500), group, comps, 7);
    REQUIRE(decision.per_sample_probs.size() == 8);
    for (const auto& row : decision.per_sample_probs) {
      double sum = 0;
      for (std::size_t j = 0; j < row.size(); ++j) {
        CHECK(row[j] == doctest::Approx(decision.probs[j]).epsilon(1e-12));
        sum += row[j];
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    // |(-2) - (-2.5)| = 0.5 beats both V = 1 and |(-9) - (-1)| = 8.
    CHECK(decision.chosen == 0);
  }
  SUBCASE("chosen component follows a permutation of component order") {
    FixedScorer closest(-2.0, -2.1);  // K = 0.1
    FixedScorer far(-9.0, -1.0);      // K = 8
    FixedScorer mid(-3.0, -4.0);      // K = 1
    const auto group = make_group(5);
    const auto cfg = cfg_with(1.0, 2.0, 300);
    std::vector<const ComponentScorer*> order_a{&closest, &far, &mid};
    std::vector<const ComponentScorer*> order_b{&far, &mid, &closest};
    CHECK(task_indicator(cfg, group, order_a, 3).chosen == 0);
    CHECK(task_indicator(cfg, group, order_b, 3).chosen == 2);
  }
  SUBCASE("exact ties break to the lowest component index") {
    FixedScorer twin_a(-2.0, -2.5), twin_b(-2.0, -2.5);
    std::vector<const ComponentScorer*> comps{&twin_a, &twin_b};
    const auto decision =
        task_indicator(cfg_with(1.0, 1.0, 100), make_group(3), comps, 5);
    CHECK(decision.chosen == 0);
  }
  SUBCASE("force_expand always yields NEW") {
    FixedScorer perfect(-2.0, -2.0);
    std::vector<const ComponentScorer*> comps{&perfect};
    auto cfg = cfg_with(1.0, 1.0, 100);
    cfg.force_expand = true;
    CHECK(task_indicator(cfg, make_group(3), comps, 5).is_new());
  }
}
