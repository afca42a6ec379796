#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "limix/errors.hpp"
#include "limix/harness.hpp"
#include "limix/risk.hpp"

using namespace limix;

namespace {

// Random finite-support instance in d dimensions.
DistHandle random_support(int d, std::uint64_t seed, int task = 0, int generation = 0) {
  RngEngine rng(seed);
  const int n = 4 + uniform_int(rng, 5);
  std::vector<LabeledPoint> pts(n);
  std::vector<double> prob(n);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    pts[i].x.resize(d);
    for (double& v : pts[i].x) v = -2.0 + 4.0 * uniform01(rng);
    pts[i].y = uniform_int(rng, 2);
    prob[i] = 0.1 + uniform01(rng);
    sum += prob[i];
  }
  for (double& p : prob) p /= sum;
  // Renormalise exactly.
  double acc = 0;
  for (int i = 0; i + 1 < n; ++i) acc += prob[i];
  prob[n - 1] = 1.0 - acc;
  return handle_from_support(std::move(pts), std::move(prob), task, generation);
}

DistHandle blob_handle(std::uint64_t seed) {
  TaskSpec spec;
  spec.seed = seed;
  spec.geometry_seed = derive_seed(seed, {1});
  spec.n_classes = 2;
  return handle_from_spec(spec, 0);
}

HypothesisClass linear_h(int d, int classes = 2) {
  HypothesisClass H;
  H.d_x = d;
  H.n_classes = classes;
  return H;
}

PsiBudget small_budget(std::uint64_t seed) {
  PsiBudget b;
  b.restarts = 4;
  b.steps = 150;
  b.n_eval = 400;
  b.seed = seed;
  return b;
}

}  // namespace

TEST_CASE("tau losses satisfy the assumptions") {
  CHECK(tau_loss(LossKind::ZeroOne, 1, 1) == 0.0);
  CHECK(tau_loss(LossKind::ZeroOne, 1, 2) == 1.0);
  CHECK(tau_loss(LossKind::BoundedAbsolute, 0, 3) == 1.0);
  CHECK(tau_loss(LossKind::BoundedAbsolute, 2, 2) == 0.0);
  RngEngine rng(3);
  for (int i = 0; i < 200; ++i) {
    const int a = uniform_int(rng, 5), b = uniform_int(rng, 5), c = uniform_int(rng, 5);
    for (auto kind : {LossKind::ZeroOne, LossKind::BoundedAbsolute}) {
      CHECK(tau_loss(kind, a, b) == tau_loss(kind, b, a));
      CHECK(tau_loss(kind, a, b) <= 1.0);
      CHECK(tau_loss(kind, a, c) <= tau_loss(kind, a, b) + tau_loss(kind, b, c) + 1e-15);
    }
  }
}

TEST_CASE("empirical risk") {
  const auto dist = blob_handle(5);
  SUBCASE("the true labeling function has zero risk") {
    CHECK(empirical_risk(*dist.true_label, dist, 500, 7) == 0.0);
  }
  SUBCASE("constant classifier on a balanced task: exact count oracle") {
    const Classifier constant = [](const FeatureVec&) { return 0; };
    const int n = 400;
    const double risk = empirical_risk(constant, dist, n, 11);
    // Independent count on the same draw.
    const auto pts = dist.draw(n, 11);
    int wrong = 0;
    for (const auto& p : pts)
      if (p.y != 0) ++wrong;
    CHECK(risk == doctest::Approx(static_cast<double>(wrong) / n).epsilon(1e-12));
    CHECK(std::abs(risk - 0.5) <= 3.0 / (2.0 * std::sqrt(n)) + 0.1);
  }
  SUBCASE("identical seeds give identical risk") {
    const Classifier constant = [](const FeatureVec&) { return 1; };
    CHECK(empirical_risk(constant, dist, 300, 13) ==
          empirical_risk(constant, dist, 300, 13));
  }
}

TEST_CASE("disagreement risk") {
  const auto dist = blob_handle(9);
  const Classifier h1 = [](const FeatureVec& x) { return x[0] > 0 ? 1 : 0; };
  const Classifier h2 = [](const FeatureVec& x) { return x[1] > 0.5 ? 1 : 0; };
  CHECK(disagreement_risk(h1, h1, dist, 300, 3) == 0.0);
  CHECK(disagreement_risk(h1, h2, dist, 300, 3) ==
        disagreement_risk(h2, h1, dist, 300, 3));

  // Exact enumeration on finite support matches a hand-rolled loop.
  const auto support = random_support(2, 21);
  double hand = 0;
  for (std::size_t i = 0; i < support.support->points.size(); ++i) {
    const auto& p = support.support->points[i];
    hand += support.support->prob[i] * (h1(p.x) != h2(p.x) ? 1.0 : 0.0);
  }
  CHECK(exact_disagreement(h1, h2, support) == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("discrepancy basic properties") {
  const auto H = linear_h(2);
  SUBCASE("identical handles and seeds give exactly zero") {
    const auto dist = blob_handle(31);
    const auto res = discrepancy(dist, dist, H, small_budget(5));
    CHECK(res.estimate == 0.0);
  }
  SUBCASE("swapping the sides changes nothing") {
    const auto a = random_support(2, 41);
    const auto b = random_support(2, 43);
    const auto ab = discrepancy(a, b, H, small_budget(7));
    const auto ba = discrepancy(b, a, H, small_budget(7));
    CHECK(std::abs(ab.estimate - ba.estimate) < 1e-9);
  }
  SUBCASE("estimates are nonnegative and certificates replay exactly") {
    const auto a = random_support(2, 51);
    const auto b = random_support(2, 53);
    const auto budget = small_budget(9);
    const auto res = discrepancy(a, b, H, budget);
    CHECK(res.estimate >= 0.0);
    CHECK(std::abs(evaluate_discrepancy_pair(a, b, res.h, res.h_prime, budget) -
                   res.estimate) < 1e-9);
  }
  SUBCASE("zero budget is a configuration error") {
    const auto a = random_support(2, 61);
    PsiBudget bad;
    bad.restarts = 0;
    CHECK_THROWS_AS(discrepancy(a, a, linear_h(2), bad), ConfigError);
  }
}

TEST_CASE("adversarial estimate reaches the enumerated sup on toy instances") {
  for (std::uint64_t inst = 0; inst < 5; ++inst) {
    const int d = inst % 2 == 0 ? 1 : 2;
    const auto a = random_support(d, derive_seed(70, {inst}));
    const auto b = random_support(d, derive_seed(71, {inst}));
    const auto grid = classifier_grid(d, -2.5, 2.5, d == 1 ? 81 : 41);
    const double exact = discrepancy_enumerated(a, b, grid);
    PsiBudget budget = small_budget(derive_seed(72, {inst}));
    budget.restarts = 6;
    budget.steps = 250;
    const auto adv = discrepancy(a, b, linear_h(d), budget);
    CAPTURE(inst);
    CHECK(adv.estimate >= 0.9 * exact - 1e-12);
  }
}

TEST_CASE("combined error") {
  const auto a = random_support(2, 81);
  const auto b = random_support(2, 83);
  const Classifier h1 = [](const FeatureVec& x) { return x[0] > 0 ? 1 : 0; };
  const Classifier h2 = [](const FeatureVec& x) { return x[1] > 0 ? 1 : 0; };
  SUBCASE("identical classifiers give zero") {
    const auto ce = combined_error(h1, h1, h1, a, b, 200, 3);
    CHECK(ce.total == 0.0);
  }
  SUBCASE("total is the sum of the two addends, each hand-checkable") {
    const auto ce = combined_error(h1, h2, *blob_handle(1).true_label, a, b, 200, 3);
    CHECK(ce.total == doctest::Approx(ce.first_term + ce.second_term));
    CHECK(ce.second_term == doctest::Approx(exact_disagreement(h1, h2, b)));
  }
}

TEST_CASE("train_ideal fits separable finite supports") {
  std::vector<LabeledPoint> pts;
  std::vector<double> prob;
  for (int i = 0; i < 10; ++i) {
    const double x = i < 5 ? -1.0 - 0.1 * i : 1.0 + 0.1 * i;
    pts.push_back({{x, 0.3}, i < 5 ? 0 : 1});
    prob.push_back(0.1);
  }
  const auto dist = handle_from_support(pts, prob, 0, 0);
  const auto h = train_ideal(dist, linear_h(2), 100, 200, 5);
  CHECK(exact_risk(as_classifier(h), dist) == doctest::Approx(0.0));
}

TEST_CASE("bound_chain") {
  const auto H = linear_h(8, 3);
  AnalysisBudget budget;
  budget.psi = small_budget(11);
  budget.ideal_draws = 600;
  budget.ideal_steps = 150;
  budget.risk_n = 500;
  budget.seed = 11;

  TaskSpec spec;
  spec.seed = 5;
  spec.geometry_seed = 6;
  spec.n_classes = 3;
  spec.n_train = 400;
  const auto s0 = handle_from_spec(spec, 0);
  auto t0 = handle_from_samples(generate_task(spec).train, 0, 1);
  t0.true_label = s0.true_label;

  SUBCASE("a single-link chain reduces to the three-term bound") {
    const auto report = bound_chain(0, {s0, t0}, H, *s0.true_label, budget);
    CHECK(report.links.size() == 1);
    CHECK(report.rhs_total == doctest::Approx(report.head_term + report.links[0].psi +
                                              report.links[0].sigma));
    CHECK(report.lhs_risk == 0.0);  // h = h*
    CHECK(!report.violated);
  }
  SUBCASE("identical consecutive handles contribute zero discrepancy") {
    const auto report = bound_chain(0, {s0, s0, s0}, H, *s0.true_label, budget);
    REQUIRE(report.links.size() == 2);
    CHECK(report.links[0].psi == 0.0);
    CHECK(report.links[1].psi == 0.0);
  }
  SUBCASE("chains need at least two handles") {
    CHECK_THROWS_AS(bound_chain(0, {s0}, H, *s0.true_label, budget), InputError);
  }
}

TEST_CASE("ledger bookkeeping") {
  SUBCASE("from history") {
    // Component 0 served tasks {0, 3}, component 1 served {1}, comp 2 {2}.
    const auto ledger = ledger_from_history({{0, 3}, {1}, {2}}, 4);
    CHECK(ledger.K == 3);
    CHECK(ledger.t == 4);
    CHECK(ledger.B == std::vector<int>({1, 2, 3}));
    CHECK(ledger.Bprime == std::vector<int>({0}));
    CHECK(ledger.Bhat == std::vector<int>({2}));
  }
  SUBCASE("trade-off ratio worked examples") {
    BoundLedger l;
    l.K = 4;
    l.t = 5;
    l.B = {0, 1, 2};
    l.Bprime = {3, 4};
    l.Bhat = {2, 2};
    CHECK(trade_off_ratio(l) == doctest::Approx(0.5));
    BoundLedger l2;
    l2.K = 3;
    l2.t = 4;
    l2.B = {0, 1, 2};
    l2.Bprime = {3};
    l2.Bhat = {3};
    CHECK(trade_off_ratio(l2) == doctest::Approx(0.0));
    BoundLedger bad;
    bad.K = 1;
    bad.t = 2;
    bad.B = {0};
    bad.Bprime = {1};
    bad.Bhat = {2};
    CHECK_THROWS_AS(trade_off_ratio(bad), InputError);  // K == card(B')
  }
  SUBCASE("validation rejects inconsistent ledgers") {
    BoundLedger l;
    l.K = 1;
    l.t = 2;
    l.B = {0};       // task 1 missing
    CHECK_THROWS_AS(l.validate(), InputError);
    l.Bprime = {1};
    l.Bhat = {1};  // must be > 1
    CHECK_THROWS_AS(l.validate(), InputError);
  }
}

TEST_CASE("lifelong totals") {
  auto fake_report = [](int task, int links, double rhs) {
    BoundChainReport r;
    r.task = task;
    r.rhs_total = rhs;
    r.links.resize(links);
    return r;
  };
  SUBCASE("fresh components: every chain has one link, totals just add up") {
    const auto ledger = ledger_from_history({{0}, {1}, {2}}, 3);
    const std::vector<BoundChainReport> reports{fake_report(0, 1, 0.2),
                                                fake_report(1, 1, 0.3),
                                                fake_report(2, 1, 0.1)};
    CHECK(lifelong_total(reports, ledger) == doctest::Approx(0.6));
  }
  SUBCASE("single model: task chains lengthen towards early tasks") {
    const auto ledger = grm_ledger(3);
    CHECK(ledger.K == 1);
    CHECK(ledger.B == std::vector<int>({2}));
    const std::vector<BoundChainReport> reports{fake_report(0, 3, 1.0),
                                                fake_report(1, 2, 0.5),
                                                fake_report(2, 1, 0.2)};
    CHECK(lifelong_total(reports, ledger) == doctest::Approx(1.7));
    const auto totals = lifelong_totals(reports, ledger,
                                        {fake_report(0, 1, 0.1), fake_report(1, 1, 0.1),
                                         fake_report(2, 1, 0.1)},
                                        ledger_from_history({{0}, {1}, {2}}, 3));
    CHECK(totals.single_total == doctest::Approx(1.7));
    CHECK(totals.mixture_total == doctest::Approx(0.3));
  }
  SUBCASE("chain-length mismatches are rejected") {
    const auto ledger = grm_ledger(2);
    const std::vector<BoundChainReport> reports{fake_report(0, 1, 1.0),
                                                fake_report(1, 1, 0.5)};
    CHECK_THROWS_AS(lifelong_total(reports, ledger), InputError);
  }
}

TEST_CASE("order sensitivity") {
  ExperimentConfig cfg;
  cfg.kind = StreamKind::MsfirAnalog;
  cfg.n_tasks = 2;
  cfg.seed = 5;
  cfg.stream_params.n_train = 200;
  cfg.stream_params.n_test = 80;
  cfg.stream_params.n_classes = 2;
  cfg.hidden = 24;
  cfg.d_z = 2;
  cfg.epochs = 3;
  cfg.psi_restarts = 2;
  cfg.psi_steps = 80;
  cfg.psi_n_eval = 200;
  cfg.ideal_draws = 300;
  cfg.ideal_steps = 100;
  cfg.risk_n = 300;

  SUBCASE("fewer than two permutations is a configuration error") {
    CHECK_THROWS_AS(order_sensitivity(cfg, cfg.seed, {{0, 1}}), ConfigError);
    CHECK_THROWS_AS(order_sensitivity(cfg, cfg.seed, {{0, 1}, {0, 0}}), ConfigError);
  }
  SUBCASE("identity ordering reproduces itself bit-for-bit") {
    const auto rows1 = order_sensitivity(cfg, cfg.seed, {{0, 1}, {1, 0}});
    const auto rows2 = order_sensitivity(cfg, cfg.seed, {{0, 1}, {1, 0}});
    REQUIRE(rows1.size() == 2);
    CHECK(rows1[0].mixture_total == rows2[0].mixture_total);
    CHECK(rows1[1].mixture_total == rows2[1].mixture_total);
    CHECK(rows1[0].components >= 1);
  }
}
