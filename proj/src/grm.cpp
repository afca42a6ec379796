#include "limix/grm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "limix/checkpoint.hpp"
#include "limix/errors.hpp"
#include "limix/optim.hpp"

namespace limix {

namespace {

struct TrainItem {
  std::vector<double> x;
  int label = -1;
  int task_code = -1;
};

void scale_grads(ParamSet& g, double s) {
  for (auto& t : g.tensors)
    for (double& v : t.data) v *= s;
}

Tensor make_meta(const std::string& name, std::vector<double> values) {
  Tensor t;
  t.name = name;
  t.shape = {static_cast<int>(values.size())};
  t.data = std::move(values);
  return t;
}

}  // namespace

GrmModel::GrmModel(ModelConfig cfg, std::uint64_t seed)
    : config(cfg), model_seed(seed) {
  config.validate();
  if (!config.supervised) throw ModeError("GrmModel requires supervised mode");
  const int cond = config.cond_dim();
  RngEngine rng(derive_seed(seed, {0x62A}));
  const MlpSpec enc{{config.d_x + cond, config.hidden, 2 * config.d_z}};
  const MlpSpec dec{{config.d_z + cond, config.hidden, config.d_x}};
  const MlpSpec cls{{config.d_x + config.d_z, config.hidden, config.n_classes}};
  add_mlp_params(params, "enc", enc);
  add_mlp_params(params, "dec", dec);
  add_mlp_params(params, "cls", cls);
  init_mlp_params(params, "enc", enc, rng);
  init_mlp_params(params, "dec", dec, rng);
  init_mlp_params(params, "cls", cls, rng);
}

MlpView GrmModel::encoder_view(ParamSet* grads) const {
  MlpView v;
  v.append(params, grads, "enc");
  return v;
}

MlpView GrmModel::decoder_view(ParamSet* grads) const {
  MlpView v;
  v.append(params, grads, "dec");
  return v;
}

MlpView GrmModel::classifier_view(ParamSet* grads) const {
  MlpView v;
  v.append(params, grads, "cls");
  return v;
}

std::vector<double> GrmModel::cond_vector(int label, int task_code) const {
  std::vector<double> cond(config.cond_dim(), 0.0);
  if (label >= 0 && label < config.n_classes) cond[label] = 1.0;
  if (task_code >= 0 && task_code < config.task_code_dim)
    cond[config.n_classes + task_code] = 1.0;
  return cond;
}

int GrmModel::classifier_label(const std::vector<double>& x) const {
  std::vector<double> in(x);
  in.resize(x.size() + static_cast<std::size_t>(config.d_z), 0.0);
  const auto logits = classifier_view().forward(in);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                          logits.begin());
}

std::vector<double> GrmModel::predict(const Sample& x, std::uint64_t seed) const {
  RngEngine rng(derive_seed(seed, {0x9D}));
  return class_probs(classifier_view(), x.features, config.n_classes,
                     config.n_mc_eval, rng);
}

double GrmModel::loglik(const Sample& x, int n_mc, RngEngine& rng) const {
  const auto enc = encoder_view();
  const auto dec = decoder_view();
  std::vector<int> tasks;
  for (auto [t, y] : seen_pairs)
    if (std::find(tasks.begin(), tasks.end(), t) == tasks.end()) tasks.push_back(t);
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
    for (int y : labels)
      best = std::max(best, generator_objective(enc, dec, x.features,
                                                cond_vector(y, t), n_mc, rng)
                                .total);
  return best;
}

std::vector<Sample> GrmModel::generate_for_task(int task, int n, RngEngine& rng) const {
  if (n < 1) throw InputError("generate_for_task: n must be >= 1");
  if (task < 0 || task >= tasks_seen)
    throw InputError("generate_for_task: task " + std::to_string(task) +
                     " not learnt yet (" + std::to_string(tasks_seen) + " seen)");
  std::vector<std::pair<int, int>> pairs;
  for (auto p : seen_pairs)
    if (p.first == task) pairs.push_back(p);
  if (pairs.empty())
    throw InputError("generate_for_task: oracle found no (task, class) pairs for task " +
                     std::to_string(task) + "; empty distribution");
  const auto dec = decoder_view();
  std::vector<Sample> out;
  out.reserve(n);
  std::vector<double> z(config.d_z);
  for (int i = 0; i < n; ++i) {
    const auto [t, y] = pairs[uniform_int(rng, static_cast<int>(pairs.size()))];
    for (double& v : z) v = normal01(rng);
    Sample s;
    s.features = decode_mean(dec, z, cond_vector(y, t));
    s.label = classifier_label(s.features);
    out.push_back(std::move(s));
  }
  return out;
}

void GrmModel::learn_task(const std::vector<Sample>& train, int task_index, int epochs,
                          const EpochCallback& on_epoch) {
  if (train.empty()) throw InputError("learn_task: empty training set");
  if (task_index < 0 || task_index >= config.task_code_dim)
    throw ConfigError("learn_task: task index exceeds task_code_dim");
  for (const auto& s : train)
    if (!s.label || *s.label < 0 || *s.label >= config.n_classes)
      throw InputError("learn_task: GRM needs in-range labels");

  // Frozen pre-task copy: the only replay source for this whole task.
  const bool with_replay = tasks_seen > 0;
  const GrmModel frozen = *this;

  ParamSet grads = ParamSet::zeros_like(params);
  const auto enc = encoder_view(&grads);
  const auto dec = decoder_view(&grads);
  const auto cls = classifier_view(&grads);

  std::vector<Tensor*> gen_params, cls_params;
  std::vector<const Tensor*> gen_grads, cls_grads;
  for (auto& t : params.tensors) {
    const bool is_cls = t.name.rfind("cls", 0) == 0;
    const bool is_dec = t.name.rfind("dec", 0) == 0;
    if (!is_cls) {
      gen_params.push_back(&t);
      gen_grads.push_back(&grads.at(t.name));
    }
    if (!is_dec) {
      cls_params.push_back(&t);
      cls_grads.push_back(&grads.at(t.name));
    }
  }
  AdamAscent gen_opt(gen_params, gen_grads, config.lr);
  AdamAscent cls_opt(cls_params, cls_grads, config.lr);

  RngEngine rng(derive_seed(model_seed, {0x721, static_cast<std::uint64_t>(task_index)}));
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  auto draw_replay = [&]() {
    TrainItem item;
    const auto& pairs = frozen.seen_pairs;
    const auto [t, y] = pairs[uniform_int(rng, static_cast<int>(pairs.size()))];
    std::vector<double> z(config.d_z);
    for (double& v : z) v = normal01(rng);
    item.x = decode_mean(frozen.decoder_view(), z, frozen.cond_vector(y, t));
    item.label = frozen.classifier_label(item.x);
    item.task_code = t;
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
          item.label = *train[order[i]].label;
          item.task_code = task_index;
          items.push_back(std::move(item));
        }
        if (with_replay) {
          const std::size_t n_new = items.size();
          for (std::size_t i = 0; i < n_new; ++i) items.push_back(draw_replay());
        }

        grads.zero();
        double total = 0;
        for (const auto& item : items)
          total += generator_objective_backward(enc, dec, item.x,
                                                cond_vector(item.label, item.task_code),
                                                config.n_mc_train, rng)
                       .total;
        if (!std::isfinite(total)) throw NumericalError("generator objective batch total");
        scale_grads(grads, 1.0 / static_cast<double>(items.size()));
        gen_opt.step();

        grads.zero();
        total = 0;
        for (const auto& item : items)
          total += classifier_objective_backward(enc, cls, item.x,
                                                 cond_vector(item.label, item.task_code),
                                                 item.label, config.n_classes,
                                                 config.n_mc_train, rng)
                       .total;
        if (!std::isfinite(total)) throw NumericalError("classifier objective batch total");
        scale_grads(grads, 1.0 / static_cast<double>(items.size()));
        cls_opt.step();
      }
      if (on_epoch) on_epoch(epoch);
    }
  } catch (const NumericalError& e) {
    throw DivergenceError("GRM task " + std::to_string(task_index) +
                          " diverged: " + e.what());
  }

  for (const auto& s : train) {
    const std::pair<int, int> p{task_index, *s.label};
    if (std::find(seen_pairs.begin(), seen_pairs.end(), p) == seen_pairs.end())
      seen_pairs.push_back(p);
  }
  std::sort(seen_pairs.begin(), seen_pairs.end());
  tasks_seen = std::max(tasks_seen, task_index + 1);
}

void GrmModel::save(const std::string& path) const {
  ParamSet file;
  file.tensors.push_back(make_meta(
      "meta.arch",
      {static_cast<double>(config.d_x), static_cast<double>(config.d_z),
       static_cast<double>(config.hidden), static_cast<double>(config.n_classes), 1.0,
       static_cast<double>(config.task_code_dim), static_cast<double>(tasks_seen),
       config.lr, static_cast<double>(config.batch_size),
       static_cast<double>(config.n_mc_train), static_cast<double>(config.n_mc_eval),
       static_cast<double>(config.gate_n_mc)}));
  file.tensors.push_back(make_meta(
      "meta.seed", {static_cast<double>(model_seed & 0xFFFFFFFFULL),
                    static_cast<double>(model_seed >> 32)}));
  std::vector<double> pairs;
  for (auto [t, y] : seen_pairs) {
    pairs.push_back(static_cast<double>(t));
    pairs.push_back(static_cast<double>(y));
  }
  file.tensors.push_back(make_meta("meta.npairs", {static_cast<double>(pairs.size() / 2)}));
  if (!pairs.empty()) file.tensors.push_back(make_meta("meta.pairs", std::move(pairs)));
  for (const auto& t : params.tensors) {
    Tensor copy = t;
    copy.name = "grm." + t.name;
    file.tensors.push_back(std::move(copy));
  }
  write_tensor_file(path, {&file});
}

GrmModel GrmModel::load(const std::string& path) {
  const ParamSet file = read_tensor_file(path);
  const Tensor& arch = file.at("meta.arch");
  ModelConfig cfg;
  cfg.d_x = static_cast<int>(arch.data[0]);
  cfg.d_z = static_cast<int>(arch.data[1]);
  cfg.hidden = static_cast<int>(arch.data[2]);
  cfg.n_classes = static_cast<int>(arch.data[3]);
  cfg.supervised = true;
  cfg.task_code_dim = static_cast<int>(arch.data[5]);
  cfg.lr = arch.data[7];
  cfg.batch_size = static_cast<int>(arch.data[8]);
  cfg.n_mc_train = static_cast<int>(arch.data[9]);
  cfg.n_mc_eval = static_cast<int>(arch.data[10]);
  cfg.gate_n_mc = static_cast<int>(arch.data[11]);
  const Tensor& seed_t = file.at("meta.seed");
  const std::uint64_t seed = static_cast<std::uint64_t>(seed_t.data[0]) |
                             (static_cast<std::uint64_t>(seed_t.data[1]) << 32);
  GrmModel model(cfg, seed);
  model.tasks_seen = static_cast<int>(arch.data[6]);
  const int n_pairs = static_cast<int>(file.at("meta.npairs").data[0]);
  if (n_pairs > 0) {
    const Tensor& pairs = file.at("meta.pairs");
    for (int i = 0; i < n_pairs; ++i)
      model.seen_pairs.emplace_back(static_cast<int>(pairs.data[2 * i]),
                                    static_cast<int>(pairs.data[2 * i + 1]));
  }
  for (auto& t : model.params.tensors) t.data = file.at("grm." + t.name).data;
  return model;
}

}  // namespace limix
