#include "limix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "limix/checkpoint.hpp"
#include "limix/errors.hpp"
#include "limix/optim.hpp"

namespace limix {

namespace {

// Deterministic labeling rule of a classifier head: argmax at z = 0.
int head_label(const MlpView& cls, std::span<const double> x, int d_z) {
  std::vector<double> in(x.begin(), x.end());
  in.resize(x.size() + d_z, 0.0);
  const auto logits = cls.forward(in);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                          logits.begin());
}

struct TrainItem {
  std::vector<double> x;
  int label = -1;
  int task_code = -1;
};

void scale_grads(ParamSet& g, double s) {
  for (auto& t : g.tensors)
    for (double& v : t.data) v *= s;
}

// Selects tensors (and their grads) whose names start with any given prefix.
void collect_params(ParamSet& params, ParamSet& grads,
                    std::initializer_list<const char*> prefixes,
                    std::vector<Tensor*>& out_p, std::vector<const Tensor*>& out_g) {
  for (auto& t : params.tensors)
    for (const char* p : prefixes)
      if (t.name.rfind(p, 0) == 0) {
        out_p.push_back(&t);
        out_g.push_back(&grads.at(t.name));
        break;
      }
}

class MixtureScorer : public ComponentScorer {
 public:
  MixtureScorer(const Mixture& mix, int j) : mix_(mix), j_(j) {}
  double log_likelihood(const Sample& s, RngEngine& rng) const override {
    return mix_.component_loglik(j_, s, mix_.config.gate_n_mc, rng);
  }
  Sample generate(RngEngine& rng) const override {
    return mix_.replay(j_, 1, rng).front();
  }

 private:
  const Mixture& mix_;
  int j_;
};

}  // namespace

void ModelConfig::validate() const {
  if (d_x < 1 || d_z < 1 || hidden < 1)
    throw ConfigError("model: d_x, d_z and hidden must be positive");
  if (supervised && n_classes < 2) throw ConfigError("model: n_classes must be >= 2");
  if (supervised && task_code_dim < 1)
    throw ConfigError("model: task_code_dim must be >= 1");
  if (lr <= 0) throw ConfigError("model: lr must be positive");
  if (batch_size < 1 || n_mc_train < 1 || n_mc_eval < 1 || gate_n_mc < 1)
    throw ConfigError("model: batch/MC settings must be >= 1");
}

Mixture::Mixture(ModelConfig cfg, GateConfig gate_cfg, std::uint64_t seed)
    : config(cfg), gate(gate_cfg), model_seed(seed) {
  config.validate();
  shared.role = ParamRole::Shared;
  const int cond = config.cond_dim();
  RngEngine rng(derive_seed(seed, {0x5A4ED}));
  const MlpSpec enc_trunk{{config.d_x + cond, config.hidden}};
  const MlpSpec dec_trunk{{config.d_z + cond, config.hidden}};
  add_mlp_params(shared, "enc", enc_trunk);
  add_mlp_params(shared, "dec", dec_trunk);
  init_mlp_params(shared, "enc", enc_trunk, rng);
  init_mlp_params(shared, "dec", dec_trunk, rng);
}

Component Mixture::fresh_component() {
  Component comp;
  comp.indiv.role = ParamRole::Individual;
  RngEngine rng(derive_seed(model_seed, {0xC0147, static_cast<std::uint64_t>(components.size())}));
  const MlpSpec enc_head{{config.hidden, 2 * config.d_z}};
  const MlpSpec dec_head{{config.hidden, config.d_x}};
  add_mlp_params(comp.indiv, "enc_head", enc_head);
  add_mlp_params(comp.indiv, "dec_head", dec_head);
  init_mlp_params(comp.indiv, "enc_head", enc_head, rng);
  init_mlp_params(comp.indiv, "dec_head", dec_head, rng);
  if (config.supervised) {
    const MlpSpec cls{{config.d_x + config.d_z, config.hidden, config.n_classes}};
    add_mlp_params(comp.indiv, "cls", cls);
    init_mlp_params(comp.indiv, "cls", cls, rng);
  }
  return comp;
}

MlpView Mixture::encoder_view(int j, ParamSet* gshared, ParamSet* gind) const {
  MlpView v;
  v.append(shared, gshared, "enc");
  v.append(components.at(j).indiv, gind, "enc_head");
  return v;
}

MlpView Mixture::decoder_view(int j, ParamSet* gshared, ParamSet* gind) const {
  MlpView v;
  v.append(shared, gshared, "dec");
  v.append(components.at(j).indiv, gind, "dec_head");
  return v;
}

MlpView Mixture::classifier_view(int j, ParamSet* gind) const {
  if (!config.supervised) throw ModeError("classifier_view on unsupervised mixture");
  MlpView v;
  v.append(components.at(j).indiv, gind, "cls");
  return v;
}

std::vector<double> Mixture::cond_vector(int label, int task_code) const {
  std::vector<double> cond(config.cond_dim(), 0.0);
  if (!config.supervised) return cond;
  if (label >= 0 && label < config.n_classes) cond[label] = 1.0;
  if (task_code >= 0 && task_code < config.task_code_dim)
    cond[config.n_classes + task_code] = 1.0;
  return cond;
}

double Mixture::component_loglik(int j, const Sample& x, int n_mc, RngEngine& rng) const {
  const Component& comp = components.at(j);
  const auto enc = encoder_view(j);
  const auto dec = decoder_view(j);
  if (!config.supervised) {
    return generator_objective(enc, dec, x.features, {}, n_mc, rng).total;
  }
  // Supervised likelihood is the conditional generator objective, evaluated
  // under the component's own served task codes (the best match wins).
  std::vector<int> tasks = comp.tasks_served;
  if (tasks.empty()) tasks.push_back(-1);
  std::vector<int> labels;
  if (x.label) {
    labels.push_back(*x.label);
  } else {
    labels.resize(config.n_classes);
    std::iota(labels.begin(), labels.end(), 0);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (int t : tasks)
    for (int y : labels) {
      const auto cond = cond_vector(y, t);
      const double v = generator_objective(enc, dec, x.features, cond, n_mc, rng).total;
      best = std::max(best, v);
    }
  return best;
}

std::vector<Sample> Mixture::replay(int j, int n, RngEngine& rng) const {
  if (n < 1) throw InputError("replay: n must be >= 1");
  const Component& comp = components.at(j);
  const auto dec = decoder_view(j);
  std::vector<Sample> out;
  out.reserve(n);
  std::vector<double> z(config.d_z);
  for (int i = 0; i < n; ++i) {
    Sample s;
    if (config.supervised) {
      if (comp.seen_pairs.empty())
        throw ModeError("replay: component has no seen (task, class) pairs");
      const auto [t, y] =
          comp.seen_pairs[uniform_int(rng, static_cast<int>(comp.seen_pairs.size()))];
      const auto cond = cond_vector(y, t);
      for (double& v : z) v = normal01(rng);
      s.features = decode_mean(dec, z, cond);
      s.label = head_label(classifier_view(j), s.features, config.d_z);
    } else {
      for (double& v : z) v = normal01(rng);
      s.features = decode_mean(dec, z, {});
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> Mixture::generate_for_task(int j, int task, int n,
                                               RngEngine& rng) const {
  if (!config.supervised) throw ModeError("generate_for_task: supervised mixtures only");
  if (n < 1) throw InputError("generate_for_task: n must be >= 1");
  const Component& comp = components.at(j);
  std::vector<std::pair<int, int>> pairs;
  for (auto p : comp.seen_pairs)
    if (p.first == task) pairs.push_back(p);
  if (pairs.empty())
    throw InputError("generate_for_task: component " + std::to_string(j) +
                     " holds no pairs for task " + std::to_string(task) +
                     "; empty distribution");
  const auto dec = decoder_view(j);
  const auto cls = classifier_view(j);
  std::vector<Sample> out;
  out.reserve(n);
  std::vector<double> z(config.d_z);
  for (int i = 0; i < n; ++i) {
    const auto [t, y] = pairs[uniform_int(rng, static_cast<int>(pairs.size()))];
    for (double& v : z) v = normal01(rng);
    Sample s;
    s.features = decode_mean(dec, z, cond_vector(y, t));
    s.label = head_label(cls, s.features, config.d_z);
    out.push_back(std::move(s));
  }
  return out;
}

LearnRecord Mixture::learn_task(const std::vector<Sample>& train, int task_index,
                                int epochs, const EpochCallback& on_epoch) {
  if (train.empty()) throw InputError("learn_task: empty training set");
  if (config.supervised) {
    if (task_index < 0 || task_index >= config.task_code_dim)
      throw ConfigError("learn_task: task index " + std::to_string(task_index) +
                        " exceeds task_code_dim");
    for (const auto& s : train) {
      if (!s.label) throw InputError("learn_task: supervised mixture needs labels");
      if (*s.label < 0 || *s.label >= config.n_classes)
        throw InputError("learn_task: label out of range");
    }
  }

  IndicatorDecision decision;
  if (components.empty()) {
    decision.probs = {1.0};
    decision.chosen = 0;  // == K, i.e. NEW
  } else {
    std::vector<int> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    RngEngine grng(derive_seed(model_seed, {0x6A0, static_cast<std::uint64_t>(task_index)}));
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[uniform_int(grng, i + 1)]);
    const int n_g = std::min<int>(gate.n_G, static_cast<int>(train.size()));
    std::vector<Sample> group;
    group.reserve(n_g);
    for (int i = 0; i < n_g; ++i) group.push_back(train[order[i]]);

    std::vector<MixtureScorer> scorers;
    scorers.reserve(components.size());
    for (int j = 0; j < component_count(); ++j) scorers.emplace_back(*this, j);
    std::vector<const ComponentScorer*> handles;
    for (const auto& s : scorers) handles.push_back(&s);
    decision = task_indicator(gate, group, handles,
                              derive_seed(model_seed, {0x6A7E, static_cast<std::uint64_t>(task_index)}));
  }

  const bool first_task = components.empty();
  int target;
  if (decision.is_new()) {
    components.push_back(fresh_component());
    target = component_count() - 1;
  } else {
    target = decision.chosen;
  }
  const bool with_replay = !decision.is_new();

  train_component(target, train, first_task, with_replay, task_index, epochs, on_epoch);

  Component& comp = components[target];
  comp.tasks_served.push_back(task_index);
  if (config.supervised) {
    for (const auto& s : train) {
      const std::pair<int, int> p{task_index, *s.label};
      if (std::find(comp.seen_pairs.begin(), comp.seen_pairs.end(), p) ==
          comp.seen_pairs.end())
        comp.seen_pairs.push_back(p);
    }
    std::sort(comp.seen_pairs.begin(), comp.seen_pairs.end());
  }
  gate.n_total += static_cast<std::int64_t>(train.size());

  LearnRecord rec;
  rec.task_index = task_index;
  rec.chosen_component = target;
  rec.expanded = decision.is_new();
  rec.gate_probs = decision.probs;
  history.push_back(rec);
  return rec;
}

void Mixture::train_component(int j, const std::vector<Sample>& train, bool train_shared,
                              bool with_replay, int task_index, int epochs,
                              const EpochCallback& on_epoch) {
  Component& comp = components[j];
  ParamSet gshared = ParamSet::zeros_like(shared);
  ParamSet gind = ParamSet::zeros_like(comp.indiv);

  const auto enc = encoder_view(j, train_shared ? &gshared : nullptr, &gind);
  const auto dec = decoder_view(j, train_shared ? &gshared : nullptr, &gind);
  MlpView cls;
  if (config.supervised) cls = classifier_view(j, &gind);

  std::vector<Tensor*> gen_params, cls_params;
  std::vector<const Tensor*> gen_grads, cls_grads;
  collect_params(comp.indiv, gind, {"enc_head", "dec_head"}, gen_params, gen_grads);
  if (train_shared) collect_params(shared, gshared, {"enc", "dec"}, gen_params, gen_grads);
  if (config.supervised) {
    collect_params(comp.indiv, gind, {"enc_head", "cls"}, cls_params, cls_grads);
    if (train_shared) collect_params(shared, gshared, {"enc"}, cls_params, cls_grads);
  }
  AdamAscent gen_opt(gen_params, gen_grads, config.lr);
  std::optional<AdamAscent> cls_opt;
  if (config.supervised) cls_opt.emplace(cls_params, cls_grads, config.lr);

  // Frozen pre-task copy used as the replay source for the whole task.
  std::optional<Component> frozen;
  MlpView fdec, fcls;
  if (with_replay) {
    frozen = comp;
    fdec.append(shared, nullptr, "dec");
    fdec.append(frozen->indiv, nullptr, "dec_head");
    if (config.supervised) fcls.append(frozen->indiv, nullptr, "cls");
  }

  RngEngine rng(derive_seed(model_seed, {0x7124,
                                         static_cast<std::uint64_t>(task_index),
                                         static_cast<std::uint64_t>(j)}));
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  auto draw_replay_item = [&]() {
    TrainItem item;
    std::vector<double> z(config.d_z);
    if (config.supervised) {
      const auto [t, y] = frozen->seen_pairs[uniform_int(
          rng, static_cast<int>(frozen->seen_pairs.size()))];
      for (double& v : z) v = normal01(rng);
      item.x = decode_mean(fdec, z, cond_vector(y, t));
      item.label = head_label(fcls, item.x, config.d_z);
      item.task_code = t;
    } else {
      for (double& v : z) v = normal01(rng);
      item.x = decode_mean(fdec, z, {});
    }
    return item;
  };

  try {
    for (int epoch = 0; epoch < epochs; ++epoch) {
      for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
        std::swap(order[i], order[uniform_int(rng, i + 1)]);
      for (std::size_t start = 0; start < order.size();
           start += static_cast<std::size_t>(config.batch_size)) {
        const std::size_t end =
            std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
        std::vector<TrainItem> items;
        items.reserve(2 * (end - start));
        for (std::size_t i = start; i < end; ++i) {
          TrainItem item;
          item.x = train[order[i]].features;
          item.label = train[order[i]].label.value_or(-1);
          item.task_code = task_index;
          items.push_back(std::move(item));
        }
        if (with_replay) {
          const std::size_t n_new = items.size();
          for (std::size_t i = 0; i < n_new; ++i) items.push_back(draw_replay_item());
        }

        // Generator objective step (the ELBO in unsupervised mode).
        gshared.zero();
        gind.zero();
        double batch_total = 0;
        for (const auto& item : items) {
          const auto cond = config.supervised ? cond_vector(item.label, item.task_code)
                                              : std::vector<double>{};
          batch_total += generator_objective_backward(enc, dec, item.x, cond,
                                                      config.n_mc_train, rng)
                             .total;
        }
        if (!std::isfinite(batch_total))
          throw NumericalError("generator objective batch total");
        const double inv = 1.0 / static_cast<double>(items.size());
        scale_grads(gshared, inv);
        scale_grads(gind, inv);
        gen_opt.step();

        if (config.supervised) {
          // Classifier objective step on the same mini-batch.
          gshared.zero();
          gind.zero();
          batch_total = 0;
          for (const auto& item : items) {
            const auto cond = cond_vector(item.label, item.task_code);
            batch_total += classifier_objective_backward(enc, cls, item.x, cond,
                                                         item.label, config.n_classes,
                                                         config.n_mc_train, rng)
                               .total;
          }
          if (!std::isfinite(batch_total))
            throw NumericalError("classifier objective batch total");
          scale_grads(gshared, inv);
          scale_grads(gind, inv);
          cls_opt->step();
        }
      }
      if (on_epoch) on_epoch(epoch);
    }
  } catch (const NumericalError& e) {
    throw DivergenceError("task " + std::to_string(task_index) + " diverged on component " +
                          std::to_string(j) + ": " + e.what());
  }
  std::string offender;
  if (!comp.indiv.all_finite(&offender) || !shared.all_finite(&offender))
    throw DivergenceError("task " + std::to_string(task_index) +
                          " diverged: non-finite parameter tensor " + offender);
}

SelectionDetail Mixture::select_detail(const Sample& x, std::uint64_t seed) const {
  if (components.empty()) throw ModeError("select_component: no components");
  // Routing never peeks at the query's label.
  Sample unlabeled;
  unlabeled.features = x.features;
  SelectionDetail best;
  double best_k = 0;
  bool first = true;
  for (int j = 0; j < component_count(); ++j) {
    RngEngine rng(derive_seed(seed, {0x5E1, static_cast<std::uint64_t>(j)}));
    const Sample xr = replay(j, 1, rng).front();
    const double f_data = component_loglik(j, unlabeled, config.gate_n_mc, rng);
    const double f_replay = component_loglik(j, xr, config.gate_n_mc, rng);
    const double k = knowledge_affinity(f_data, f_replay);
    if (first || k < best_k) {
      best_k = k;
      best.component = j;
      first = false;
    }
  }
  // Conditioning info for the winner (best served task / label guess).
  best.task_code = components[best.component].tasks_served.empty()
                       ? -1
                       : components[best.component].tasks_served.back();
  best.label_guess = 0;
  if (config.supervised) {
    RngEngine rng(derive_seed(seed, {0x5E2}));
    const auto enc = encoder_view(best.component);
    const auto dec = decoder_view(best.component);
    double best_f = -std::numeric_limits<double>::infinity();
    for (int t : components[best.component].tasks_served)
      for (int y = 0; y < config.n_classes; ++y) {
        const double v = generator_objective(enc, dec, x.features, cond_vector(y, t),
                                             config.gate_n_mc, rng)
                             .total;
        if (v > best_f) {
          best_f = v;
          best.task_code = t;
          best.label_guess = y;
        }
      }
    if (x.label) best.label_guess = *x.label;
  }
  return best;
}

int Mixture::select_component(const Sample& x, std::uint64_t seed) const {
  return select_detail(x, seed).component;
}

std::vector<double> Mixture::predict(const Sample& x, std::uint64_t seed) const {
  if (!config.supervised) throw ModeError("predict: unsupervised mixture");
  const int j = select_component(x, seed);
  RngEngine rng(derive_seed(seed, {0x9D}));
  return class_probs(classifier_view(j), x.features, config.n_classes,
                     config.n_mc_eval, rng);
}

std::pair<std::vector<double>, double> Mixture::reconstruct(const Sample& x,
                                                            std::uint64_t seed) const {
  const auto sel = select_detail(x, seed);
  const auto enc = encoder_view(sel.component);
  const auto dec = decoder_view(sel.component);
  const int label = x.label.value_or(sel.label_guess);
  const auto cond = config.supervised ? cond_vector(label, sel.task_code)
                                      : std::vector<double>{};
  return reconstruct_mean(enc, dec, x.features, cond);
}

EvalRow Mixture::evaluate_task(const TaskSpec& spec, int task_index,
                               std::uint64_t eval_seed) const {
  const auto data = generate_task(spec);
  EvalRow row;
  row.task = task_index;
  row.component_chosen = -1;
  for (const auto& rec : history)
    if (rec.task_index == task_index) row.component_chosen = rec.chosen_component;

  double mse = 0, elbo = 0, correct = 0;
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    const Sample& s = data.test[i];
    const std::uint64_t si =
        derive_seed(eval_seed, {static_cast<std::uint64_t>(task_index), i});
    const auto sel = select_detail(s, si);
    const auto enc = encoder_view(sel.component);
    const auto dec = decoder_view(sel.component);
    const int label = s.label.value_or(sel.label_guess);
    const auto cond =
        config.supervised ? cond_vector(label, sel.task_code) : std::vector<double>{};
    mse += reconstruct_mean(enc, dec, s.features, cond).second;
    RngEngine erng(derive_seed(si, {0xE1B0}));
    elbo += generator_objective(enc, dec, s.features, cond, config.n_mc_eval, erng).total;
    if (config.supervised) {
      RngEngine prng(derive_seed(si, {0x9D}));
      const auto probs = class_probs(classifier_view(sel.component), s.features,
                                     config.n_classes, config.n_mc_eval, prng);
      const int pred = static_cast<int>(
          std::max_element(probs.begin(), probs.end()) - probs.begin());
      if (s.label && pred == *s.label) correct += 1.0;
    }
  }
  const double n = static_cast<double>(data.test.size());
  row.mse = mse / n;
  row.elbo = elbo / n;
  if (config.supervised) row.accuracy = correct / n;
  return row;
}

std::vector<EvalRow> Mixture::evaluate_stream(const TaskStream& stream, int tasks_learnt,
                                              std::uint64_t eval_seed) const {
  std::vector<EvalRow> rows;
  for (int t = 0; t < tasks_learnt && t < stream.size(); ++t)
    rows.push_back(evaluate_task(stream.tasks[t], t, eval_seed));
  return rows;
}

StudentModel Mixture::make_student(std::uint64_t seed) const {
  StudentModel student;
  student.indiv.role = ParamRole::Student;
  RngEngine rng(derive_seed(seed, {0x57D}));
  const MlpSpec enc_head{{config.hidden, 2 * config.d_z}};
  const MlpSpec dec_head{{config.hidden, config.d_x}};
  add_mlp_params(student.indiv, "enc_head", enc_head);
  add_mlp_params(student.indiv, "dec_head", dec_head);
  init_mlp_params(student.indiv, "enc_head", enc_head, rng);
  init_mlp_params(student.indiv, "dec_head", dec_head, rng);
  return student;
}

double Mixture::student_elbo(const StudentModel& student, const Sample& x, int n_mc,
                             RngEngine& rng) const {
  if (config.supervised) throw ModeError("student: unsupervised mixtures only");
  MlpView enc, dec;
  enc.append(shared, nullptr, "enc");
  enc.append(student.indiv, nullptr, "enc_head");
  dec.append(shared, nullptr, "dec");
  dec.append(student.indiv, nullptr, "dec_head");
  return generator_objective(enc, dec, x.features, {}, n_mc, rng).total;
}

void Mixture::distill_student(StudentModel& student, const std::vector<Sample>& current_train,
                              int n_replay_per_component, int epochs, RngEngine& rng) const {
  if (config.supervised) throw ModeError("distill_student: unsupervised mixtures only");
  if (n_replay_per_component < 0)
    throw InputError("distill_student: negative replay count");
  ParamSet gind = ParamSet::zeros_like(student.indiv);
  MlpView enc, dec;
  enc.append(shared, nullptr, "enc");  // trunk frozen during distillation
  enc.append(student.indiv, &gind, "enc_head");
  dec.append(shared, nullptr, "dec");
  dec.append(student.indiv, &gind, "dec_head");

  std::vector<Tensor*> params;
  std::vector<const Tensor*> grads;
  collect_params(student.indiv, gind, {"enc_head", "dec_head"}, params, grads);
  AdamAscent opt(params, grads, config.lr);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    // L_stu: the current task's data plus fresh replay from every component.
    std::vector<std::vector<double>> pool;
    pool.reserve(current_train.size() +
                 static_cast<std::size_t>(n_replay_per_component) * components.size());
    for (const auto& s : current_train) pool.push_back(s.features);
    for (int j = 0; j < component_count(); ++j) {
      if (n_replay_per_component == 0) break;
      for (auto& s : replay(j, n_replay_per_component, rng))
        pool.push_back(std::move(s.features));
    }
    std::vector<int> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[uniform_int(rng, i + 1)]);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      gind.zero();
      double total = 0;
      for (std::size_t i = start; i < end; ++i)
        total += generator_objective_backward(enc, dec, pool[order[i]], {},
                                              config.n_mc_train, rng)
                     .total;
      if (!std::isfinite(total))
        throw DivergenceError("student distillation diverged");
      scale_grads(gind, 1.0 / static_cast<double>(end - start));
      opt.step();
    }
  }
}

namespace {

Tensor make_meta(const std::string& name, std::vector<double> values) {
  Tensor t;
  t.name = name;
  t.shape = {static_cast<int>(values.size())};
  t.data = std::move(values);
  return t;
}

}  // namespace

void Mixture::save(const std::string& path) const {
  ParamSet file;
  file.tensors.push_back(make_meta(
      "meta.arch",
      {static_cast<double>(config.d_x), static_cast<double>(config.d_z),
       static_cast<double>(config.hidden), static_cast<double>(config.n_classes),
       config.supervised ? 1.0 : 0.0, static_cast<double>(config.task_code_dim),
       static_cast<double>(component_count()), config.lr,
       static_cast<double>(config.batch_size), static_cast<double>(config.n_mc_train),
       static_cast<double>(config.n_mc_eval), static_cast<double>(config.gate_n_mc)}));
  file.tensors.push_back(make_meta(
      "meta.gate", {gate.a, gate.V, static_cast<double>(gate.n_G),
                    static_cast<double>(gate.n_total), gate.force_expand ? 1.0 : 0.0}));
  file.tensors.push_back(make_meta(
      "meta.seed", {static_cast<double>(model_seed & 0xFFFFFFFFULL),
                    static_cast<double>(model_seed >> 32)}));
  for (const auto& t : shared.tensors) {
    Tensor copy = t;
    copy.name = "shared." + t.name;
    file.tensors.push_back(std::move(copy));
  }
  for (int j = 0; j < component_count(); ++j) {
    const std::string prefix = "comp" + std::to_string(j) + ".";
    const Component& comp = components[j];
    std::vector<double> served(comp.tasks_served.begin(), comp.tasks_served.end());
    std::vector<double> pairs;
    for (auto [t, y] : comp.seen_pairs) {
      pairs.push_back(static_cast<double>(t));
      pairs.push_back(static_cast<double>(y));
    }
    file.tensors.push_back(
        make_meta(prefix + "info", {static_cast<double>(served.size()),
                                    static_cast<double>(pairs.size() / 2)}));
    if (!served.empty())
      file.tensors.push_back(make_meta(prefix + "served", std::move(served)));
    if (!pairs.empty())
      file.tensors.push_back(make_meta(prefix + "pairs", std::move(pairs)));
    for (const auto& t : comp.indiv.tensors) {
      Tensor copy = t;
      copy.name = prefix + t.name;
      file.tensors.push_back(std::move(copy));
    }
  }
  write_tensor_file(path, {&file});
}

Mixture Mixture::load(const std::string& path) {
  const ParamSet file = read_tensor_file(path);
  const Tensor& arch = file.at("meta.arch");
  ModelConfig cfg;
  cfg.d_x = static_cast<int>(arch.data[0]);
  cfg.d_z = static_cast<int>(arch.data[1]);
  cfg.hidden = static_cast<int>(arch.data[2]);
  cfg.n_classes = static_cast<int>(arch.data[3]);
  cfg.supervised = arch.data[4] != 0.0;
  cfg.task_code_dim = static_cast<int>(arch.data[5]);
  const int k = static_cast<int>(arch.data[6]);
  cfg.lr = arch.data[7];
  cfg.batch_size = static_cast<int>(arch.data[8]);
  cfg.n_mc_train = static_cast<int>(arch.data[9]);
  cfg.n_mc_eval = static_cast<int>(arch.data[10]);
  cfg.gate_n_mc = static_cast<int>(arch.data[11]);

  const Tensor& gt = file.at("meta.gate");
  GateConfig gate;
  gate.a = gt.data[0];
  gate.V = gt.data[1];
  gate.n_G = static_cast<int>(gt.data[2]);
  gate.n_total = static_cast<std::int64_t>(gt.data[3]);
  gate.force_expand = gt.data[4] != 0.0;

  const Tensor& seed_t = file.at("meta.seed");
  const std::uint64_t seed = static_cast<std::uint64_t>(seed_t.data[0]) |
                             (static_cast<std::uint64_t>(seed_t.data[1]) << 32);

  Mixture mix(cfg, gate, seed);
  for (auto& t : mix.shared.tensors) t = file.at("shared." + t.name);
  for (auto& t : mix.shared.tensors)
    t.name = t.name.substr(std::string("shared.").size());
  mix.components.clear();
  for (int j = 0; j < k; ++j) {
    const std::string prefix = "comp" + std::to_string(j) + ".";
    Component comp = mix.fresh_component();
    const Tensor& info = file.at(prefix + "info");
    const int n_served = static_cast<int>(info.data[0]);
    const int n_pairs = static_cast<int>(info.data[1]);
    if (n_served > 0) {
      const Tensor& served = file.at(prefix + "served");
      for (double v : served.data) comp.tasks_served.push_back(static_cast<int>(v));
    }
    if (n_pairs > 0) {
      const Tensor& pairs = file.at(prefix + "pairs");
      for (int i = 0; i < n_pairs; ++i)
        comp.seen_pairs.emplace_back(static_cast<int>(pairs.data[2 * i]),
                                     static_cast<int>(pairs.data[2 * i + 1]));
    }
    for (auto& t : comp.indiv.tensors) {
      t.data = file.at(prefix + t.name).data;
    }
    mix.components.push_back(std::move(comp));
    // Rebuild the task -> component map for evaluate_* after a load.
    for (int task : mix.components.back().tasks_served) {
      LearnRecord rec;
      rec.task_index = task;
      rec.chosen_component = j;
      mix.history.push_back(rec);
    }
  }
  return mix;
}

}  // namespace limix
