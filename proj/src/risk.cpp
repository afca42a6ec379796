#include "limix/risk.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "limix/errors.hpp"

namespace limix {

namespace {

std::vector<double> softmax(const std::vector<double>& logits, double sharp) {
  double mx = logits[0] * sharp;
  for (double v : logits) mx = std::max(mx, v * sharp);
  std::vector<double> p(logits.size());
  double sum = 0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(logits[c] * sharp - mx);
    sum += p[c];
  }
  for (double& v : p) v /= sum;
  return p;
}

// Weighted evaluation points shared by both sides of a discrepancy estimate.
struct EvalSet {
  std::vector<FeatureVec> x;
  std::vector<double> w;  // sums to 1
};

EvalSet eval_points(const DistHandle& d, int n, std::uint64_t seed) {
  EvalSet set;
  if (d.exact()) {
    for (const auto& p : d.support->points) set.x.push_back(p.x);
    set.w = d.support->prob;
  } else {
    const auto pts = d.draw(n, seed);
    set.w.assign(pts.size(), 1.0 / static_cast<double>(pts.size()));
    for (const auto& p : pts) set.x.push_back(p.x);
  }
  return set;
}

double hard_gap(const EvalSet& a, const EvalSet& b, const ParamClassifier& h,
                const ParamClassifier& hp, LossKind kind) {
  double ea = 0, eb = 0;
  for (std::size_t i = 0; i < a.x.size(); ++i)
    ea += a.w[i] * tau_loss(kind, hp.predict(a.x[i]), h.predict(a.x[i]));
  for (std::size_t i = 0; i < b.x.size(); ++i)
    eb += b.w[i] * tau_loss(kind, hp.predict(b.x[i]), h.predict(b.x[i]));
  return std::abs(ea - eb);
}

// Flat-parameter nets used by the hypothesis class: logits and hand-rolled
// parameter gradients.
void net_logits(const HypothesisClass& H, std::span<const double> params,
                const FeatureVec& x, std::vector<double>& out) {
  const int c_n = H.n_classes, d = H.d_x;
  out.assign(c_n, 0.0);
  if (H.family == HypothesisClass::Family::Linear) {
    for (int c = 0; c < c_n; ++c) {
      double acc = params[c_n * d + c];
      for (int i = 0; i < d; ++i) acc += params[c * d + i] * x[i];
      out[c] = acc;
    }
  } else {
    const int w = H.width;
    const double* w1 = params.data();
    const double* b1 = w1 + w * d;
    const double* w2 = b1 + w;
    const double* b2 = w2 + c_n * w;
    std::vector<double> hdn(w);
    for (int k = 0; k < w; ++k) {
      double acc = b1[k];
      for (int i = 0; i < d; ++i) acc += w1[k * d + i] * x[i];
      hdn[k] = std::tanh(acc);
    }
    for (int c = 0; c < c_n; ++c) {
      double acc = b2[c];
      for (int k = 0; k < w; ++k) acc += w2[c * w + k] * hdn[k];
      out[c] = acc;
    }
  }
}

void net_backward(const HypothesisClass& H, std::span<const double> params,
                  const FeatureVec& x, const std::vector<double>& dlogits,
                  std::span<double> dparams) {
  const int c_n = H.n_classes, d = H.d_x;
  if (H.family == HypothesisClass::Family::Linear) {
    for (int c = 0; c < c_n; ++c) {
      for (int i = 0; i < d; ++i) dparams[c * d + i] += dlogits[c] * x[i];
      dparams[c_n * d + c] += dlogits[c];
    }
  } else {
    const int w = H.width;
    const double* w1 = params.data();
    const double* b1 = w1 + w * d;
    const double* w2 = b1 + w;
    double* dw1 = dparams.data();
    double* db1 = dw1 + w * d;
    double* dw2 = db1 + w;
    double* db2 = dw2 + c_n * w;
    std::vector<double> pre(w), hdn(w);
    for (int k = 0; k < w; ++k) {
      double acc = b1[k];
      for (int i = 0; i < d; ++i) acc += w1[k * d + i] * x[i];
      pre[k] = acc;
      hdn[k] = std::tanh(acc);
    }
    std::vector<double> dh(w, 0.0);
    for (int c = 0; c < c_n; ++c) {
      for (int k = 0; k < w; ++k) {
        dw2[c * w + k] += dlogits[c] * hdn[k];
        dh[k] += dlogits[c] * w2[c * w + k];
      }
      db2[c] += dlogits[c];
    }
    for (int k = 0; k < w; ++k) {
      const double g = dh[k] * (1.0 - hdn[k] * hdn[k]);
      for (int i = 0; i < d; ++i) dw1[k * d + i] += g * x[i];
      db1[k] += g;
    }
  }
}

}  // namespace

double tau_loss(LossKind kind, int y1, int y2) {
  if (kind == LossKind::ZeroOne) return y1 == y2 ? 0.0 : 1.0;
  return std::min(1.0, std::abs(static_cast<double>(y1) - static_cast<double>(y2)));
}

std::vector<LabeledPoint> DistHandle::draw(int n, std::uint64_t seed) const {
  if (n < 1) throw InputError("DistHandle::draw: n must be >= 1");
  if (support) {
    RngEngine rng(derive_seed(seed, {0xD2011}));
    std::vector<LabeledPoint> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
      double u = uniform01(rng), acc = 0;
      std::size_t pick = support->points.size() - 1;
      for (std::size_t k = 0; k < support->prob.size(); ++k) {
        acc += support->prob[k];
        if (u < acc) {
          pick = k;
          break;
        }
      }
      out.push_back(support->points[pick]);
    }
    return out;
  }
  if (!sampler) throw InputError("DistHandle: no sampler");
  return sampler(n, seed);
}

DistHandle handle_from_samples(std::vector<Sample> samples, int task, int generation) {
  if (samples.empty()) throw InputError("handle_from_samples: empty sample set");
  DistHandle h;
  h.kind = generation <= 1 ? DistHandle::Kind::RealTask : DistHandle::Kind::ModelChain;
  h.task = task;
  h.generation = generation;
  auto data = std::make_shared<std::vector<Sample>>(std::move(samples));
  h.sampler = [data](int n, std::uint64_t seed) {
    RngEngine rng(derive_seed(seed, {0x5A9}));
    std::vector<LabeledPoint> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
      const Sample& s = (*data)[uniform_int(rng, static_cast<int>(data->size()))];
      out.push_back({s.features, s.label.value_or(-1)});
    }
    return out;
  };
  return h;
}

DistHandle handle_from_spec(const TaskSpec& spec, int task) {
  DistHandle h;
  h.kind = DistHandle::Kind::RealTask;
  h.task = task;
  h.generation = 0;
  TaskSpec labeled = spec;
  labeled.supervised = true;
  h.sampler = [labeled](int n, std::uint64_t seed) {
    TaskSpec draw_spec = labeled;
    draw_spec.seed = derive_seed(labeled.seed, {0xF2E5, seed});
    draw_spec.n_train = n;
    draw_spec.n_test = 1;
    const auto data = generate_task(draw_spec);
    std::vector<LabeledPoint> out;
    out.reserve(n);
    for (const auto& s : data.train) out.push_back({s.features, *s.label});
    return out;
  };
  h.true_label = [labeled](const FeatureVec& x) { return true_label(labeled, x); };
  return h;
}

DistHandle handle_from_support(std::vector<LabeledPoint> points, std::vector<double> prob,
                               int task, int generation) {
  if (points.empty() || points.size() != prob.size())
    throw InputError("handle_from_support: bad support");
  double sum = 0;
  for (double p : prob) {
    if (p < 0) throw InputError("handle_from_support: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InputError("handle_from_support: probabilities must sum to 1");
  DistHandle h;
  h.kind = generation == 0 ? DistHandle::Kind::RealTask : DistHandle::Kind::ModelChain;
  h.task = task;
  h.generation = generation;
  h.support = DistHandle::Support{std::move(points), std::move(prob)};
  return h;
}

double empirical_risk(const Classifier& h, const DistHandle& dist, int n,
                      std::uint64_t seed) {
  if (n < 1) throw InputError("empirical_risk: n must be >= 1");
  const auto pts = dist.draw(n, seed);
  double acc = 0;
  for (const auto& p : pts) acc += tau_loss(LossKind::ZeroOne, h(p.x), p.y);
  return acc / static_cast<double>(pts.size());
}

double disagreement_risk(const Classifier& h1, const Classifier& h2,
                         const DistHandle& dist, int n, std::uint64_t seed,
                         LossKind kind) {
  if (n < 1) throw InputError("disagreement_risk: n must be >= 1");
  const auto pts = dist.draw(n, seed);
  double acc = 0;
  for (const auto& p : pts) acc += tau_loss(kind, h1(p.x), h2(p.x));
  return acc / static_cast<double>(pts.size());
}

double exact_risk(const Classifier& h, const DistHandle& dist, LossKind kind) {
  if (!dist.exact()) throw InputError("exact_risk: handle has no finite support");
  double acc = 0;
  for (std::size_t i = 0; i < dist.support->points.size(); ++i)
    acc += dist.support->prob[i] *
           tau_loss(kind, h(dist.support->points[i].x), dist.support->points[i].y);
  return acc;
}

double exact_disagreement(const Classifier& h1, const Classifier& h2,
                          const DistHandle& dist, LossKind kind) {
  if (!dist.exact()) throw InputError("exact_disagreement: handle has no finite support");
  double acc = 0;
  for (std::size_t i = 0; i < dist.support->points.size(); ++i)
    acc += dist.support->prob[i] * tau_loss(kind, h1(dist.support->points[i].x),
                                            h2(dist.support->points[i].x));
  return acc;
}

int HypothesisClass::param_count() const {
  if (family == Family::Linear) return n_classes * (d_x + 1);
  return width * d_x + width + n_classes * width + n_classes;
}

std::vector<double> ParamClassifier::logits(const FeatureVec& x) const {
  std::vector<double> out;
  net_logits(H, params, x, out);
  return out;
}

int ParamClassifier::predict(const FeatureVec& x) const {
  const auto l = logits(x);
  return static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
}

Classifier as_classifier(ParamClassifier c) {
  return [c = std::move(c)](const FeatureVec& x) { return c.predict(x); };
}

PsiResult discrepancy(const DistHandle& A, const DistHandle& B,
                      const HypothesisClass& H, const PsiBudget& budget) {
  if (budget.restarts < 1 || budget.steps < 1 || budget.n_eval < 1)
    throw ConfigError("discrepancy: budget must be positive");
  // One seed for both sides: identical handles then see identical points and
  // the estimate is exactly zero.
  const std::uint64_t pts_seed = derive_seed(budget.seed, {0xD15C});
  const EvalSet a = eval_points(A, budget.n_eval, pts_seed);
  const EvalSet b = eval_points(B, budget.n_eval, pts_seed);

  const int p_n = H.param_count();
  PsiResult best;
  best.estimate = -1;

  std::vector<double> theta(2 * p_n), grad(2 * p_n);
  std::vector<double> m(2 * p_n), v(2 * p_n);
  std::vector<double> la, lb;
  auto consider = [&](const std::vector<double>& th) {
    ParamClassifier h{H, {th.begin(), th.begin() + p_n}};
    ParamClassifier hp{H, {th.begin() + p_n, th.end()}};
    const double value = hard_gap(a, b, h, hp, H.tau);
    if (value > best.estimate) {
      best.estimate = value;
      best.h = std::move(h);
      best.h_prime = std::move(hp);
    }
  };
  // Each restart climbs in both directions of the signed gap; swapping A and
  // B then mirrors the exact trajectory set, making the estimate symmetric.
  for (int restart = 0; restart < budget.restarts; ++restart)
  for (const double sign : {1.0, -1.0}) {
    RngEngine rng(derive_seed(budget.seed, {0xAD4, static_cast<std::uint64_t>(restart)}));
    for (double& t : theta) t = 1.5 * normal01(rng);
    std::fill(m.begin(), m.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    long step_t = 0;

    for (int step = 0; step < budget.steps; ++step) {
      const double sharp = 2.0 + 8.0 * step / std::max(1, budget.steps - 1);
      std::fill(grad.begin(), grad.end(), 0.0);
      // d/dtheta of sum_w softdis on each side; side weight +1 for A, -1 for B.
      auto accumulate = [&](const EvalSet& set, double side) {
        std::span<const double> th_h(theta.data(), p_n);
        std::span<const double> th_hp(theta.data() + p_n, p_n);
        for (std::size_t i = 0; i < set.x.size(); ++i) {
          net_logits(H, th_h, set.x[i], la);
          net_logits(H, th_hp, set.x[i], lb);
          const auto p = softmax(la, sharp);
          const auto q = softmax(lb, sharp);
          double dot = 0;
          for (int c = 0; c < H.n_classes; ++c) dot += p[c] * q[c];
          const double w = sign * side * set.w[i];
          std::vector<double> dlh(H.n_classes), dlhp(H.n_classes);
          for (int c = 0; c < H.n_classes; ++c) {
            dlh[c] = w * (-sharp) * p[c] * (q[c] - dot);
            dlhp[c] = w * (-sharp) * q[c] * (p[c] - dot);
          }
          net_backward(H, th_h, set.x[i], dlh, std::span<double>(grad.data(), p_n));
          net_backward(H, th_hp, set.x[i], dlhp,
                       std::span<double>(grad.data() + p_n, p_n));
        }
      };
      accumulate(a, 1.0);
      accumulate(b, -1.0);
      ++step_t;
      const double bc1 = 1.0 - std::pow(0.9, step_t);
      const double bc2 = 1.0 - std::pow(0.999, step_t);
      for (int i = 0; i < 2 * p_n; ++i) {
        m[i] = 0.9 * m[i] + 0.1 * grad[i];
        v[i] = 0.999 * v[i] + 0.001 * grad[i] * grad[i];
        theta[i] += 0.05 * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + 1e-8);
        theta[i] = std::clamp(theta[i], -H.param_bound, H.param_bound);
      }
      if (step % 10 == 9) consider(theta);
    }
    consider(theta);
  }
  if (best.estimate < 0) best.estimate = 0;
  return best;
}

double evaluate_discrepancy_pair(const DistHandle& A, const DistHandle& B,
                                 const ParamClassifier& h, const ParamClassifier& h_prime,
                                 const PsiBudget& budget) {
  const std::uint64_t pts_seed = derive_seed(budget.seed, {0xD15C});
  const EvalSet a = eval_points(A, budget.n_eval, pts_seed);
  const EvalSet b = eval_points(B, budget.n_eval, pts_seed);
  return hard_gap(a, b, h, h_prime, h.H.tau);
}

double discrepancy_enumerated(const DistHandle& A, const DistHandle& B,
                              const std::vector<ParamClassifier>& grid) {
  if (!A.exact() || !B.exact())
    throw InputError("discrepancy_enumerated: handles must carry finite support");
  if (grid.empty()) throw InputError("discrepancy_enumerated: empty grid");
  // Precompute every classifier's labels on both supports.
  const auto label_all = [&](const DistHandle& d) {
    std::vector<std::vector<int>> out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out[g].reserve(d.support->points.size());
      for (const auto& p : d.support->points) out[g].push_back(grid[g].predict(p.x));
    }
    return out;
  };
  const auto la = label_all(A), lb = label_all(B);
  const LossKind kind = grid.front().H.tau;
  double best = 0;
  for (std::size_t g1 = 0; g1 < grid.size(); ++g1)
    for (std::size_t g2 = 0; g2 < grid.size(); ++g2) {
      double ea = 0, eb = 0;
      for (std::size_t i = 0; i < A.support->points.size(); ++i)
        ea += A.support->prob[i] * tau_loss(kind, la[g2][i], la[g1][i]);
      for (std::size_t i = 0; i < B.support->points.size(); ++i)
        eb += B.support->prob[i] * tau_loss(kind, lb[g2][i], lb[g1][i]);
      best = std::max(best, std::abs(ea - eb));
    }
  return best;
}

std::vector<ParamClassifier> classifier_grid(int d_x, double lo, double hi,
                                             int resolution) {
  if (d_x != 1 && d_x != 2)
    throw InputError("classifier_grid: only 1-D and 2-D grids supported");
  if (resolution < 2) throw InputError("classifier_grid: resolution must be >= 2");
  HypothesisClass H;
  H.family = HypothesisClass::Family::Linear;
  H.d_x = d_x;
  H.n_classes = 2;
  std::vector<ParamClassifier> grid;
  if (d_x == 1) {
    for (int polarity = 0; polarity < 2; ++polarity)
      for (int i = 0; i < resolution; ++i) {
        const double b = lo + (hi - lo) * i / (resolution - 1);
        const double s = polarity == 0 ? 1.0 : -1.0;
        // logits: class0 = 0, class1 = s*(x - b)
        grid.push_back({H, {0.0, s, 0.0, -s * b}});
      }
  } else {
    const int n_angles = resolution;
    for (int ai = 0; ai < n_angles; ++ai) {
      const double ang = 2.0 * kPi * ai / n_angles;
      const double wx = std::cos(ang), wy = std::sin(ang);
      for (int i = 0; i < resolution; ++i) {
        const double r = lo + (hi - lo) * i / (resolution - 1);
        // logits: class0 = 0, class1 = w.x - r
        grid.push_back({H, {0.0, 0.0, wx, wy, 0.0, -r}});
      }
    }
  }
  return grid;
}

CombinedError combined_error(const Classifier& hA, const Classifier& hB,
                             const Classifier& hStar, const DistHandle& A,
                             const DistHandle& B, int n, std::uint64_t seed) {
  CombinedError out;
  if (A.exact() && B.exact()) {
    out.first_term = exact_disagreement(hStar, hA, A);
    out.second_term = exact_disagreement(hA, hB, B);
  } else {
    out.first_term = disagreement_risk(hStar, hA, A, n, derive_seed(seed, {0xCE1}));
    out.second_term = disagreement_risk(hA, hB, B, n, derive_seed(seed, {0xCE2}));
  }
  out.total = out.first_term + out.second_term;
  return out;
}

ParamClassifier train_ideal(const DistHandle& dist, const HypothesisClass& H,
                            int n_draws, int steps, std::uint64_t seed) {
  if (n_draws < 1 || steps < 1) throw ConfigError("train_ideal: bad budget");
  std::vector<LabeledPoint> pts;
  std::vector<double> w;
  if (dist.exact()) {
    pts = dist.support->points;
    w = dist.support->prob;
  } else {
    pts = dist.draw(n_draws, derive_seed(seed, {0x1DEA}));
    w.assign(pts.size(), 1.0 / static_cast<double>(pts.size()));
  }
  const int p_n = H.param_count();
  ParamClassifier out{H, std::vector<double>(p_n, 0.0)};
  RngEngine rng(derive_seed(seed, {0x1DEB}));
  for (double& v : out.params) v = 0.1 * normal01(rng);

  std::vector<double> m(p_n, 0.0), v2(p_n, 0.0), grad(p_n), logits;
  for (int step = 0; step < steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      net_logits(H, out.params, pts[i].x, logits);
      const auto p = softmax(logits, 1.0);
      const int y = std::clamp(pts[i].y, 0, H.n_classes - 1);
      std::vector<double> dl(H.n_classes);
      for (int c = 0; c < H.n_classes; ++c)
        dl[c] = w[i] * ((c == y ? 1.0 : 0.0) - p[c]);  // ascend log-likelihood
      net_backward(H, out.params, pts[i].x, dl, grad);
    }
    const double bc1 = 1.0 - std::pow(0.9, step + 1);
    const double bc2 = 1.0 - std::pow(0.999, step + 1);
    for (int i = 0; i < p_n; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * grad[i];
      v2[i] = 0.999 * v2[i] + 0.001 * grad[i] * grad[i];
      out.params[i] += 0.1 * (m[i] / bc1) / (std::sqrt(v2[i] / bc2) + 1e-8);
      out.params[i] = std::clamp(out.params[i], -H.param_bound, H.param_bound);
    }
  }
  return out;
}

BoundChainReport bound_chain(int task, const std::vector<DistHandle>& chain,
                             const HypothesisClass& H, const Classifier& h,
                             const AnalysisBudget& budget) {
  if (chain.size() < 2)
    throw InputError("bound_chain: need at least [S_i, S~^(1)]");
  BoundChainReport report;
  report.task = task;

  const std::uint64_t s0 = derive_seed(budget.seed, {0xB0, static_cast<std::uint64_t>(task)});

  std::vector<ParamClassifier> ideals;
  ideals.reserve(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k)
    ideals.push_back(train_ideal(chain[k], H, budget.ideal_draws, budget.ideal_steps,
                                 derive_seed(s0, {0x1D, k})));

  auto risk_on = [&](const Classifier& c1, const Classifier& c2, const DistHandle& d,
                     std::uint64_t seed) {
    return d.exact() ? exact_disagreement(c1, c2, d)
                     : disagreement_risk(c1, c2, d, budget.risk_n, seed);
  };

  // Measured target risk on S_i = chain[0].
  report.lhs_risk = chain[0].exact() ? exact_risk(h, chain[0])
                                     : empirical_risk(h, chain[0], budget.risk_n,
                                                      derive_seed(s0, {0x10}));
  const std::size_t last = chain.size() - 1;
  report.head_term =
      risk_on(h, as_classifier(ideals[last]), chain[last], derive_seed(s0, {0x11}));

  double rhs = report.head_term;
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    ChainLink link;
    link.k = static_cast<int>(k);
    PsiBudget pb = budget.psi;
    pb.seed = derive_seed(s0, {0x12, k});
    link.psi = discrepancy(chain[k], chain[k + 1], H, pb).estimate;
    const auto hk = as_classifier(ideals[k]);
    if (chain[k].true_label) {
      link.sigma_first = risk_on(hk, *chain[k].true_label, chain[k],
                                 derive_seed(s0, {0x13, k}));
    } else {
      // Labels of the handle stand in for its labeling function.
      link.sigma_first = chain[k].exact()
                             ? exact_risk(hk, chain[k])
                             : empirical_risk(hk, chain[k], budget.risk_n,
                                              derive_seed(s0, {0x13, k}));
    }
    link.sigma_second = risk_on(hk, as_classifier(ideals[k + 1]), chain[k + 1],
                                derive_seed(s0, {0x14, k}));
    link.sigma = link.sigma_first + link.sigma_second;
    rhs += link.psi + link.sigma;
    report.links.push_back(std::move(link));
  }
  report.rhs_total = rhs;
  report.violated = report.lhs_risk > report.rhs_total + 1e-12;
  return report;
}

void BoundLedger::validate() const {
  if (Bprime.size() != Bhat.size())
    throw InputError("ledger: card(B') != card(Bhat)");
  if (static_cast<int>(B.size() + Bprime.size()) != t)
    throw InputError("ledger: B and B' must partition the " + std::to_string(t) +
                     " tasks");
  std::vector<int> all;
  all.insert(all.end(), B.begin(), B.end());
  all.insert(all.end(), Bprime.begin(), Bprime.end());
  std::sort(all.begin(), all.end());
  for (int i = 0; i < t; ++i)
    if (all[i] != i) throw InputError("ledger: tasks must cover 0..t-1 exactly once");
  for (int b : Bhat)
    if (b <= 1) throw InputError("ledger: every Bhat entry must be > 1");
  if (K < 1 || K > t) throw InputError("ledger: K must be in [1, t]");
}

BoundLedger ledger_from_history(const std::vector<std::vector<int>>& tasks_per_component,
                                int n_tasks) {
  BoundLedger ledger;
  ledger.K = static_cast<int>(tasks_per_component.size());
  ledger.t = n_tasks;
  for (const auto& served : tasks_per_component) {
    for (std::size_t p = 0; p < served.size(); ++p) {
      const int refinements = static_cast<int>(served.size() - 1 - p);
      if (refinements == 0) {
        ledger.B.push_back(served[p]);
      } else {
        ledger.Bprime.push_back(served[p]);
        ledger.Bhat.push_back(refinements + 1);
      }
    }
  }
  std::sort(ledger.B.begin(), ledger.B.end());
  ledger.validate();
  return ledger;
}

double trade_off_ratio(const BoundLedger& ledger) {
  ledger.validate();
  const double denom = ledger.K - static_cast<double>(ledger.Bprime.size());
  if (denom == 0)
    throw InputError("trade_off_ratio: undefined, K equals card(B')");
  return (ledger.K - static_cast<double>(ledger.B.size())) / denom;
}

double lifelong_total(const std::vector<BoundChainReport>& reports,
                      const BoundLedger& ledger) {
  ledger.validate();
  if (static_cast<int>(reports.size()) != ledger.t)
    throw InputError("lifelong_total: need one report per task");
  for (const auto& r : reports) {
    const bool in_b = std::find(ledger.B.begin(), ledger.B.end(), r.task) !=
                      ledger.B.end();
    std::size_t expected_links = 1;
    if (!in_b) {
      const auto it = std::find(ledger.Bprime.begin(), ledger.Bprime.end(), r.task);
      if (it == ledger.Bprime.end())
        throw InputError("lifelong_total: task missing from ledger");
      expected_links =
          static_cast<std::size_t>(ledger.Bhat[it - ledger.Bprime.begin()]);
    }
    if (r.links.size() != expected_links)
      throw InputError("lifelong_total: chain length for task " +
                       std::to_string(r.task) + " inconsistent with ledger");
  }
  double total = 0;
  for (const auto& r : reports) total += r.rhs_total;
  return total;
}

LifelongTotals lifelong_totals(const std::vector<BoundChainReport>& single_reports,
                               const BoundLedger& single_ledger,
                               const std::vector<BoundChainReport>& mixture_reports,
                               const BoundLedger& mixture_ledger) {
  LifelongTotals totals;
  totals.single_total = lifelong_total(single_reports, single_ledger);
  totals.mixture_total = lifelong_total(mixture_reports, mixture_ledger);
  return totals;
}

}  // namespace limix
