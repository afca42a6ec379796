#include "limix/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>

#include <json.hpp>

#include "limix/checkpoint.hpp"
#include "limix/csv.hpp"
#include "limix/errors.hpp"

namespace fs = std::filesystem;

namespace limix {

namespace {

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("LIMIX_LOG");
    if (!env) return 0;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
  }();
  return level;
}

std::uint64_t feature_seed(const FeatureVec& x) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : x) {
    const auto* b = reinterpret_cast<const unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof(double); ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::vector<LabeledPoint> to_points(const std::vector<Sample>& samples) {
  std::vector<LabeledPoint> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.features, s.label.value_or(-1)});
  return out;
}

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg,
                    const std::vector<std::string>& files, bool complete,
                    const std::string& started_at) {
  nlohmann::json m;
  char hash_hex[24];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(cfg.config_hash));
  m["config_hash"] = hash_hex;
  m["seed"] = cfg.seed;
  m["artifact_version"] = "limix-0.1.0";
  m["started_at"] = started_at;
  m["finished_at"] = complete ? now_iso8601() : "";
  m["complete"] = complete;
  m["files"] = files;
  std::ofstream f(dir / "manifest.json", std::ios::trunc);
  if (!f) throw MissingArtifactError("cannot write manifest in " + dir.string());
  f << m.dump(2) << "\n";
}

// One model's bound-chain decomposition as long-format CSV rows.
void emit_analysis_rows(CsvWriter& csv, const std::string& experiment,
                        const ModelAnalysis& analysis, std::uint64_t seed) {
  for (const auto& r : analysis.reports) {
    csv.write_row({experiment, fmt_num(r.task), "0", "R", fmt_num(r.lhs_risk),
                   fmt_num(static_cast<double>(seed))});
    csv.write_row({experiment, fmt_num(r.task),
                   fmt_num(static_cast<int>(r.links.size())), "R'",
                   fmt_num(r.head_term), fmt_num(static_cast<double>(seed))});
    for (const auto& link : r.links) {
      csv.write_row({experiment, fmt_num(r.task), fmt_num(link.k), "Psi",
                     fmt_num(link.psi), fmt_num(static_cast<double>(seed))});
      csv.write_row({experiment, fmt_num(r.task), fmt_num(link.k), "sigma",
                     fmt_num(link.sigma), fmt_num(static_cast<double>(seed))});
    }
    csv.write_row({experiment, fmt_num(r.task),
                   fmt_num(static_cast<int>(r.links.size())), "violated",
                   r.violated ? "1" : "0", fmt_num(static_cast<double>(seed))});
  }
}

void emit_ledger_row(CsvWriter& csv, const std::string& model, const ModelAnalysis& a) {
  std::string v = "undefined";
  try {
    v = fmt_num(trade_off_ratio(a.ledger));
  } catch (const InputError&) {
  }
  csv.write_row({model, fmt_num(a.ledger.K), fmt_num(a.ledger.t),
                 fmt_num(static_cast<int>(a.ledger.B.size())),
                 fmt_num(static_cast<int>(a.ledger.Bprime.size())), v,
                 fmt_num(a.total)});
}

std::string order_string(const std::vector<int>& order) {
  std::string s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(order[i]);
  }
  return s;
}

}  // namespace

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[limix] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[limix:debug] " << msg << "\n";
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_ini(IniDoc::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_ini(const IniDoc& ini) {
  static const std::map<std::string, std::vector<std::string>> schema = {
      {"stream",
       {"kind", "n_tasks", "seed", "d_x", "n_classes", "n_train", "n_test",
        "supervised", "rotation_deg"}},
      {"model",
       {"hidden", "d_z", "lr", "epochs", "batch", "n_mc_train", "n_mc_eval",
        "task_code_dim", "distill_replay", "distill_epochs"}},
      {"gate", {"a", "V", "n_G", "gate_n_mc", "force_expand"}},
      {"analysis",
       {"family", "width", "psi_restarts", "psi_steps", "psi_n_eval", "ideal_draws",
        "ideal_steps", "risk_n", "series_n", "order_perms", "fig3c"}},
      {"output", {"dir"}},
  };
  ini.enforce_schema(schema);
  ini.require_sections({"stream", "model", "gate", "output"});

  ExperimentConfig cfg;
  cfg.kind = stream_kind_from_string(ini.get("stream", "kind"));
  cfg.n_tasks = static_cast<int>(ini.get_int("stream", "n_tasks", 5));
  cfg.seed = static_cast<std::uint64_t>(ini.get_int("stream", "seed", 1));
  cfg.stream_params.d_x = static_cast<int>(ini.get_int("stream", "d_x", 8));
  cfg.stream_params.n_classes = static_cast<int>(ini.get_int("stream", "n_classes", 4));
  cfg.stream_params.n_train = static_cast<int>(ini.get_int("stream", "n_train", 2000));
  cfg.stream_params.n_test = static_cast<int>(ini.get_int("stream", "n_test", 500));
  cfg.stream_params.supervised = ini.get_bool("stream", "supervised", true);
  cfg.stream_params.rotation_deg = ini.get_num("stream", "rotation_deg", 10.0);

  cfg.hidden = static_cast<int>(ini.get_int("model", "hidden", 64));
  cfg.d_z = static_cast<int>(ini.get_int("model", "d_z", 4));
  cfg.lr = ini.get_num("model", "lr", 1e-3);
  cfg.epochs = static_cast<int>(ini.get_int("model", "epochs", 15));
  cfg.batch = static_cast<int>(ini.get_int("model", "batch", 64));
  cfg.n_mc_train = static_cast<int>(ini.get_int("model", "n_mc_train", 1));
  cfg.n_mc_eval = static_cast<int>(ini.get_int("model", "n_mc_eval", 16));
  cfg.task_code_dim = static_cast<int>(ini.get_int("model", "task_code_dim", 8));
  cfg.distill_replay = static_cast<int>(ini.get_int("model", "distill_replay", 200));
  cfg.distill_epochs = static_cast<int>(ini.get_int("model", "distill_epochs", 10));

  cfg.gate_a = ini.get_num("gate", "a", 1.0);
  cfg.gate_v = ini.get_num("gate", "V", 3.0);
  cfg.gate_n_g = static_cast<int>(ini.get_int("gate", "n_G", 64));
  cfg.gate_n_mc = static_cast<int>(ini.get_int("gate", "gate_n_mc", 2));
  cfg.force_expand = ini.get_bool("gate", "force_expand", false);

  const std::string family = ini.get_or("analysis", "family", "linear");
  if (family == "linear")
    cfg.family = HypothesisClass::Family::Linear;
  else if (family == "mlp-1-hidden")
    cfg.family = HypothesisClass::Family::Mlp1;
  else
    throw ConfigError("unknown hypothesis family: " + family);
  cfg.h_width = static_cast<int>(ini.get_int("analysis", "width", 16));
  cfg.psi_restarts = static_cast<int>(ini.get_int("analysis", "psi_restarts", 8));
  cfg.psi_steps = static_cast<int>(ini.get_int("analysis", "psi_steps", 300));
  cfg.psi_n_eval = static_cast<int>(ini.get_int("analysis", "psi_n_eval", 1000));
  cfg.ideal_draws = static_cast<int>(ini.get_int("analysis", "ideal_draws", 5000));
  cfg.ideal_steps = static_cast<int>(ini.get_int("analysis", "ideal_steps", 300));
  cfg.risk_n = static_cast<int>(ini.get_int("analysis", "risk_n", 2000));
  cfg.series_n = static_cast<int>(ini.get_int("analysis", "series_n", 200));
  cfg.order_perms = static_cast<int>(ini.get_int("analysis", "order_perms", 0));
  cfg.fig3c = ini.get_bool("analysis", "fig3c", false);

  cfg.out_dir = ini.get("output", "dir");
  cfg.config_hash = ini.content_hash();
  cfg.raw_text = ini.raw_text();
  return cfg;
}

ModelConfig ExperimentConfig::model_config(bool supervised) const {
  ModelConfig mc;
  mc.d_x = stream_params.d_x;
  mc.d_z = d_z;
  mc.hidden = hidden;
  mc.n_classes = stream_params.n_classes;
  mc.supervised = supervised;
  mc.task_code_dim = std::max(task_code_dim, n_tasks);
  mc.lr = lr;
  mc.batch_size = batch;
  mc.n_mc_train = n_mc_train;
  mc.n_mc_eval = n_mc_eval;
  mc.gate_n_mc = gate_n_mc;
  return mc;
}

GateConfig ExperimentConfig::gate_config() const {
  GateConfig gc;
  gc.a = gate_a;
  gc.V = gate_v;
  gc.n_G = gate_n_g;
  gc.n_total = 0;
  gc.force_expand = force_expand;
  return gc;
}

TaskStream ExperimentConfig::stream() const {
  return make_stream(kind, n_tasks, seed, stream_params);
}

HypothesisClass ExperimentConfig::hypothesis_class(int d_x, int n_classes) const {
  HypothesisClass H;
  H.family = family;
  H.d_x = d_x;
  H.n_classes = n_classes;
  H.width = h_width;
  H.tau = LossKind::ZeroOne;
  return H;
}

AnalysisBudget ExperimentConfig::analysis_budget(std::uint64_t analysis_seed) const {
  AnalysisBudget b;
  b.psi.restarts = psi_restarts;
  b.psi.steps = psi_steps;
  b.psi.n_eval = psi_n_eval;
  b.psi.seed = analysis_seed;
  b.ideal_draws = ideal_draws;
  b.ideal_steps = ideal_steps;
  b.risk_n = risk_n;
  b.seed = analysis_seed;
  return b;
}

std::string ExperimentConfig::stream_id() const {
  return std::string(stream_kind_name(kind)) + "-s" + std::to_string(seed);
}

TrainRun train_mixture(const ExperimentConfig& cfg, std::uint64_t seed,
                       bool keep_snapshots, bool force_expand_override,
                       const SeriesHook& hook) {
  TrainRun run{make_stream(cfg.kind, cfg.n_tasks, seed, cfg.stream_params),
               Mixture(cfg.model_config(cfg.stream_params.supervised),
                       cfg.gate_config(),
                       derive_seed(seed, {0x30DE1, force_expand_override ? 1u : 0u})),
               {},
               {}};
  if (force_expand_override) run.mixture.gate.force_expand = true;
  const std::uint64_t eval_seed = derive_seed(seed, {0xE7A1});
  for (int t = 0; t < run.stream.size(); ++t) {
    const auto data = generate_task(run.stream.tasks[t]);
    log_info("mixture: task " + std::to_string(t));
    run.mixture.learn_task(data.train, t, cfg.epochs,
                           hook ? EpochCallback([&, t](int e) { hook(t, e); })
                                : EpochCallback());
    run.stream.current_index = t + 1;
    if (keep_snapshots) run.snapshots.push_back(run.mixture);
    run.eval_tables.push_back(run.mixture.evaluate_stream(run.stream, t + 1, eval_seed));
  }
  return run;
}

GrmRun train_grm(const ExperimentConfig& cfg, std::uint64_t seed,
                 const SeriesHook& hook) {
  if (!cfg.stream_params.supervised)
    throw ConfigError("GRM baseline requires a supervised stream");
  GrmRun run{make_stream(cfg.kind, cfg.n_tasks, seed, cfg.stream_params),
             GrmModel(cfg.model_config(true), derive_seed(seed, {0x62131})),
             {}};
  for (int t = 0; t < run.stream.size(); ++t) {
    const auto data = generate_task(run.stream.tasks[t]);
    log_info("grm: task " + std::to_string(t));
    run.model.learn_task(data.train, t, cfg.epochs,
                         hook ? EpochCallback([&, t](int e) { hook(t, e); })
                              : EpochCallback());
    run.snapshots.push_back(run.model);
  }
  return run;
}

DistHandle real_handle(const TaskStream& stream, int task) {
  return handle_from_spec(stream.tasks.at(task), task);
}

DistHandle train_data_handle(const TaskStream& stream, int task) {
  TaskSpec spec = stream.tasks.at(task);
  spec.supervised = true;
  auto h = handle_from_samples(generate_task(spec).train, task, 1);
  h.true_label = [spec](const FeatureVec& x) { return true_label(spec, x); };
  return h;
}

std::vector<DistHandle> grm_chain(const std::vector<GrmModel>& snapshots,
                                  const TaskStream& stream, int task) {
  if (task < 0 || task >= static_cast<int>(snapshots.size()))
    throw InputError("grm_chain: task outside snapshot range");
  std::vector<DistHandle> chain;
  chain.push_back(real_handle(stream, task));
  chain.push_back(train_data_handle(stream, task));
  for (int j = task + 1; j < static_cast<int>(snapshots.size()); ++j) {
    auto snap = std::make_shared<GrmModel>(snapshots[j]);
    DistHandle h;
    h.kind = DistHandle::Kind::ModelChain;
    h.task = task;
    h.generation = j - task + 1;
    h.sampler = [snap, task](int n, std::uint64_t seed) {
      RngEngine rng(derive_seed(seed, {0x6E2}));
      return to_points(snap->generate_for_task(task, n, rng));
    };
    h.true_label = [snap](const FeatureVec& x) { return snap->classifier_label(x); };
    chain.push_back(std::move(h));
  }
  return chain;
}

std::vector<DistHandle> mixture_chain_ordered(const std::vector<Mixture>& snapshots,
                                              const TaskStream& stream, int task,
                                              const std::vector<int>& order) {
  const Mixture& final_mix = snapshots.back();
  int comp = -1;
  for (const auto& rec : final_mix.history)
    if (rec.task_index == task) comp = rec.chosen_component;
  if (comp < 0) throw InputError("mixture_chain: task never learnt");
  const auto& served = final_mix.components[comp].tasks_served;
  const auto it = std::find(served.begin(), served.end(), task);
  const std::size_t pos = static_cast<std::size_t>(it - served.begin());

  auto position_of = [&order](int t) {
    const auto oit = std::find(order.begin(), order.end(), t);
    if (oit == order.end()) throw InputError("mixture_chain: task missing from order");
    return static_cast<int>(oit - order.begin());
  };

  std::vector<DistHandle> chain;
  chain.push_back(real_handle(stream, task));
  chain.push_back(train_data_handle(stream, task));
  for (std::size_t q = pos + 1; q < served.size(); ++q) {
    const int snap_at = position_of(served[q]);
    auto snap = std::make_shared<Mixture>(snapshots.at(snap_at));
    DistHandle h;
    h.kind = DistHandle::Kind::ModelChain;
    h.task = task;
    h.generation = static_cast<int>(q - pos) + 1;
    h.sampler = [snap, comp, task](int n, std::uint64_t seed) {
      RngEngine rng(derive_seed(seed, {0x6E3}));
      return to_points(snap->generate_for_task(comp, task, n, rng));
    };
    h.true_label = [snap, comp](const FeatureVec& x) {
      std::vector<double> in(x);
      in.resize(x.size() + static_cast<std::size_t>(snap->config.d_z), 0.0);
      const auto logits = snap->classifier_view(comp).forward(in);
      return static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                              logits.begin());
    };
    chain.push_back(std::move(h));
  }
  return chain;
}

std::vector<DistHandle> mixture_chain(const std::vector<Mixture>& snapshots,
                                      const TaskStream& stream, int task) {
  std::vector<int> order(snapshots.size());
  std::iota(order.begin(), order.end(), 0);
  return mixture_chain_ordered(snapshots, stream, task, order);
}

Classifier grm_classifier(const GrmModel& model) {
  auto snap = std::make_shared<GrmModel>(model);
  return [snap](const FeatureVec& x) { return snap->classifier_label(x); };
}

Classifier mixture_classifier(const Mixture& mix) {
  auto snap = std::make_shared<Mixture>(mix);
  return [snap](const FeatureVec& x) {
    Sample s;
    s.features = x;
    const auto probs = snap->predict(s, feature_seed(x));
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                            probs.begin());
  };
}

BoundLedger grm_ledger(int n_tasks) {
  std::vector<int> all(n_tasks);
  std::iota(all.begin(), all.end(), 0);
  return ledger_from_history({all}, n_tasks);
}

BoundLedger mixture_ledger(const Mixture& mix, int n_tasks) {
  std::vector<std::vector<int>> per_comp;
  for (const auto& c : mix.components) per_comp.push_back(c.tasks_served);
  return ledger_from_history(per_comp, n_tasks);
}

ModelAnalysis analyze_grm(const GrmRun& run, const ExperimentConfig& cfg,
                          std::uint64_t analysis_seed) {
  ModelAnalysis out;
  const auto H = cfg.hypothesis_class(cfg.stream_params.d_x, cfg.stream_params.n_classes);
  const auto budget = cfg.analysis_budget(analysis_seed);
  const auto h = grm_classifier(run.model);
  for (int t = 0; t < run.stream.size(); ++t)
    out.reports.push_back(bound_chain(t, grm_chain(run.snapshots, run.stream, t), H, h,
                                      budget));
  out.ledger = grm_ledger(run.stream.size());
  out.total = lifelong_total(out.reports, out.ledger);
  return out;
}

ModelAnalysis analyze_mixture(const std::vector<Mixture>& snapshots,
                              const Mixture& final_mix, const TaskStream& stream,
                              const ExperimentConfig& cfg, std::uint64_t analysis_seed) {
  ModelAnalysis out;
  const auto H = cfg.hypothesis_class(cfg.stream_params.d_x, cfg.stream_params.n_classes);
  const auto budget = cfg.analysis_budget(analysis_seed);
  const auto h = mixture_classifier(final_mix);
  for (int t = 0; t < stream.size(); ++t)
    out.reports.push_back(bound_chain(t, mixture_chain(snapshots, stream, t), H, h,
                                      budget));
  out.ledger = mixture_ledger(final_mix, stream.size());
  out.total = lifelong_total(out.reports, out.ledger);
  return out;
}

namespace {

// Per-epoch task-0 target risk of a model under training.
template <typename PredictFn>
double series_risk(const std::vector<Sample>& test, int series_n,
                   const PredictFn& predict) {
  const int n = std::min<int>(series_n, static_cast<int>(test.size()));
  int wrong = 0;
  for (int i = 0; i < n; ++i)
    if (predict(test[i], i) != *test[i].label) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(n);
}

}  // namespace

CompareRun run_compare_core(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.stream_params.supervised)
    throw ConfigError("compare requires a supervised stream");
  const auto stream = make_stream(cfg.kind, cfg.n_tasks, seed, cfg.stream_params);
  TaskSpec task0_spec = stream.tasks[0];
  const auto task0 = generate_task(task0_spec);
  const std::uint64_t series_seed = derive_seed(seed, {0x5E81E5});

  CompareRun out{TrainRun{stream, Mixture(cfg.model_config(true), cfg.gate_config(), 0), {}, {}},
                 TrainRun{stream, Mixture(cfg.model_config(true), cfg.gate_config(), 0), {}, {}},
                 GrmRun{stream, GrmModel(cfg.model_config(true), 0), {}},
                 {}, {}, {}, {}, {}, {}};

  {
    Mixture* live = nullptr;
    auto hook = [&](int task, int epoch) {
      out.limix_series.push_back(
          {task, epoch,
           series_risk(task0.test, cfg.series_n, [&](const Sample& s, int i) {
             Sample q;
             q.features = s.features;
             const auto probs = live->predict(q, derive_seed(series_seed, {static_cast<std::uint64_t>(i)}));
             return static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                                     probs.begin());
           })});
    };
    TrainRun run = [&] {
      TrainRun r{stream,
                 Mixture(cfg.model_config(true), cfg.gate_config(),
                         derive_seed(seed, {0x30DE1, 0u})),
                 {},
                 {}};
      live = &r.mixture;
      const std::uint64_t eval_seed = derive_seed(seed, {0xE7A1});
      for (int t = 0; t < r.stream.size(); ++t) {
        const auto data = generate_task(r.stream.tasks[t]);
        log_info("compare/limix: task " + std::to_string(t));
        r.mixture.learn_task(data.train, t, cfg.epochs,
                             [&, t](int e) { hook(t, e); });
        r.stream.current_index = t + 1;
        r.snapshots.push_back(r.mixture);
        r.eval_tables.push_back(r.mixture.evaluate_stream(r.stream, t + 1, eval_seed));
      }
      return r;
    }();
    out.limix = std::move(run);
  }
  {
    Mixture* live = nullptr;
    auto hook = [&](int task, int epoch) {
      out.control_series.push_back(
          {task, epoch,
           series_risk(task0.test, cfg.series_n, [&](const Sample& s, int i) {
             Sample q;
             q.features = s.features;
             const auto probs = live->predict(q, derive_seed(series_seed, {static_cast<std::uint64_t>(i)}));
             return static_cast<int>(std::max_element(probs.begin(), probs.end()) -
                                     probs.begin());
           })});
    };
    TrainRun r{stream,
               Mixture(cfg.model_config(true), cfg.gate_config(),
                       derive_seed(seed, {0x30DE1, 1u})),
               {},
               {}};
    r.mixture.gate.force_expand = true;
    live = &r.mixture;
    const std::uint64_t eval_seed = derive_seed(seed, {0xE7A1});
    for (int t = 0; t < r.stream.size(); ++t) {
      const auto data = generate_task(r.stream.tasks[t]);
      log_info("compare/control: task " + std::to_string(t));
      r.mixture.learn_task(data.train, t, cfg.epochs, [&, t](int e) { hook(t, e); });
      r.stream.current_index = t + 1;
      r.snapshots.push_back(r.mixture);
    }
    out.control = std::move(r);
  }
  {
    GrmModel* live = nullptr;
    auto hook = [&](int task, int epoch) {
      out.grm_series.push_back(
          {task, epoch,
           series_risk(task0.test, cfg.series_n, [&](const Sample& s, int) {
             return live->classifier_label(s.features);
           })});
    };
    GrmRun r{stream, GrmModel(cfg.model_config(true), derive_seed(seed, {0x62131})), {}};
    live = &r.model;
    for (int t = 0; t < r.stream.size(); ++t) {
      const auto data = generate_task(r.stream.tasks[t]);
      log_info("compare/grm: task " + std::to_string(t));
      r.model.learn_task(data.train, t, cfg.epochs, [&, t](int e) { hook(t, e); });
      r.snapshots.push_back(r.model);
    }
    out.grm = std::move(r);
  }

  const std::uint64_t aseed = derive_seed(seed, {0xA7A});
  out.grm_analysis = analyze_grm(out.grm, cfg, aseed);
  out.mix_analysis =
      analyze_mixture(out.limix.snapshots, out.limix.mixture, out.limix.stream, cfg, aseed);
  out.totals = {out.grm_analysis.total, out.mix_analysis.total};
  return out;
}

std::vector<Fig3cPoint> grm_epoch_risk_series(const ExperimentConfig& cfg,
                                              std::uint64_t seed) {
  if (!cfg.stream_params.supervised)
    throw ConfigError("fig3c series requires a supervised stream");
  const auto stream = make_stream(cfg.kind, cfg.n_tasks, seed, cfg.stream_params);
  const auto H = cfg.hypothesis_class(cfg.stream_params.d_x, cfg.stream_params.n_classes);
  GrmModel model(cfg.model_config(true), derive_seed(seed, {0x62131}));
  const auto target_handle = real_handle(stream, 0);
  const std::uint64_t rseed = derive_seed(seed, {0xF16});

  std::vector<Fig3cPoint> rows;
  for (int t = 0; t < stream.size(); ++t) {
    // The task-0 source for this whole task: real data during task 0, the
    // frozen pre-task copy's generations afterwards.
    DistHandle source;
    if (t == 0) {
      source = train_data_handle(stream, 0);
    } else {
      auto snap = std::make_shared<GrmModel>(model);
      source.kind = DistHandle::Kind::ModelChain;
      source.task = 0;
      source.generation = t;
      source.sampler = [snap](int n, std::uint64_t s) {
        RngEngine rng(derive_seed(s, {0x6E2}));
        return to_points(snap->generate_for_task(0, n, rng));
      };
    }
    PsiBudget pb;
    pb.restarts = cfg.psi_restarts;
    pb.steps = cfg.psi_steps;
    pb.n_eval = cfg.psi_n_eval;
    pb.seed = derive_seed(rseed, {0x9991, static_cast<std::uint64_t>(t)});
    const double psi = discrepancy(source, target_handle, H, pb).estimate;

    const auto target_pts = target_handle.draw(cfg.series_n, derive_seed(rseed, {1, static_cast<std::uint64_t>(t)}));
    const auto source_pts = source.draw(cfg.series_n, derive_seed(rseed, {2, static_cast<std::uint64_t>(t)}));
    const auto data = generate_task(stream.tasks[t]);
    model.learn_task(data.train, t, cfg.epochs, [&](int epoch) {
      double target = 0, src = 0;
      for (const auto& p : target_pts)
        target += tau_loss(LossKind::ZeroOne, model.classifier_label(p.x), p.y);
      for (const auto& p : source_pts)
        src += tau_loss(LossKind::ZeroOne, model.classifier_label(p.x), p.y);
      rows.push_back({t, epoch, target / target_pts.size(), src / source_pts.size(), psi});
    });
  }
  return rows;
}

Fig3dReport fig3d_check(const Mixture& mix, const TaskStream& stream,
                        const ExperimentConfig& cfg, std::uint64_t analysis_seed) {
  const auto H = cfg.hypothesis_class(cfg.stream_params.d_x, cfg.stream_params.n_classes);
  const auto budget = cfg.analysis_budget(analysis_seed);
  const auto s0 = real_handle(stream, 0);
  const auto t0 = train_data_handle(stream, 0);
  const auto h = mixture_classifier(mix);
  Fig3dReport out;
  out.target = empirical_risk(h, s0, budget.risk_n, derive_seed(analysis_seed, {1}));
  out.source = empirical_risk(h, t0, budget.risk_n, derive_seed(analysis_seed, {2}));
  PsiBudget pb = budget.psi;
  pb.seed = derive_seed(analysis_seed, {3});
  out.psi = discrepancy(s0, t0, H, pb).estimate;
  const auto h0 = train_ideal(s0, H, budget.ideal_draws, budget.ideal_steps,
                              derive_seed(analysis_seed, {4}));
  const auto h1 = train_ideal(t0, H, budget.ideal_draws, budget.ideal_steps,
                              derive_seed(analysis_seed, {5}));
  out.sigma = combined_error(as_classifier(h0), as_classifier(h1), *s0.true_label, s0,
                             t0, budget.risk_n, derive_seed(analysis_seed, {6}))
                  .total;
  return out;
}

std::vector<OrderRow> order_sensitivity(const ExperimentConfig& cfg, std::uint64_t seed,
                                        const std::vector<std::vector<int>>& permutations) {
  if (permutations.size() < 2)
    throw ConfigError("order_sensitivity: need at least 2 permutations");
  const auto stream = make_stream(cfg.kind, cfg.n_tasks, seed, cfg.stream_params);
  for (const auto& p : permutations) {
    std::vector<int> sorted(p);
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < stream.size(); ++i)
      if (i >= static_cast<int>(sorted.size()) || sorted[i] != i)
        throw ConfigError("order_sensitivity: not a permutation of 0..n_tasks-1");
  }
  const std::uint64_t aseed = derive_seed(seed, {0xA7A});
  std::vector<OrderRow> rows;
  for (const auto& order : permutations) {
    Mixture mix(cfg.model_config(cfg.stream_params.supervised), cfg.gate_config(),
                derive_seed(seed, {0x30DE1, 0u}));
    std::vector<Mixture> snapshots;
    for (int k = 0; k < stream.size(); ++k) {
      const int task = order[k];
      const auto data = generate_task(stream.tasks[task]);
      mix.learn_task(data.train, task, cfg.epochs);
      snapshots.push_back(mix);
    }
    const auto H = cfg.hypothesis_class(cfg.stream_params.d_x, cfg.stream_params.n_classes);
    const auto budget = cfg.analysis_budget(aseed);
    const auto h = mixture_classifier(mix);
    std::vector<BoundChainReport> reports;
    for (int t = 0; t < stream.size(); ++t)
      reports.push_back(
          bound_chain(t, mixture_chain_ordered(snapshots, stream, t, order), H, h, budget));
    const auto ledger = mixture_ledger(mix, stream.size());
    rows.push_back({order, mix.component_count(), lifelong_total(reports, ledger)});
  }
  return rows;
}

// ---- file-emitting drivers ----

namespace {

void emit_metrics(const fs::path& dir, const ExperimentConfig& cfg, const TrainRun& run,
                  std::vector<std::string>& files) {
  CsvWriter csv((dir / "metrics.csv").string(),
                {"stream_id", "after_task", "task", "component_chosen", "mse", "elbo",
                 "accuracy"});
  for (std::size_t after = 0; after < run.eval_tables.size(); ++after)
    for (const auto& row : run.eval_tables[after])
      csv.write_row({cfg.stream_id(), fmt_num(static_cast<int>(after)), fmt_num(row.task),
                     fmt_num(row.component_chosen), fmt_num(row.mse), fmt_num(row.elbo),
                     row.accuracy ? fmt_num(*row.accuracy) : ""});
  files.push_back("metrics.csv");
}

void emit_gate_log(const fs::path& dir, const TrainRun& run,
                   std::vector<std::string>& files) {
  CsvWriter csv((dir / "gate_decisions.csv").string(),
                {"task", "chosen_component", "expanded", "probs"});
  for (const auto& rec : run.mixture.history) {
    std::string probs;
    for (std::size_t i = 0; i < rec.gate_probs.size(); ++i) {
      if (i) probs += ';';
      probs += fmt_num(rec.gate_probs[i]);
    }
    csv.write_row({fmt_num(rec.task_index), fmt_num(rec.chosen_component),
                   rec.expanded ? "1" : "0", probs});
  }
  files.push_back("gate_decisions.csv");
}

void emit_series(const fs::path& dir, const CompareRun& core,
                 std::vector<std::string>& files) {
  CsvWriter csv((dir / "series.csv").string(),
                {"model", "task", "epoch", "task0_risk"});
  auto emit = [&](const char* model, const std::vector<SeriesPoint>& series) {
    for (const auto& p : series)
      csv.write_row({model, fmt_num(p.task), fmt_num(p.epoch), fmt_num(p.risk0)});
  };
  emit("grm", core.grm_series);
  emit("limix", core.limix_series);
  emit("control", core.control_series);
  files.push_back("series.csv");
}

}  // namespace

RunArtifacts run_train(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const std::string started = now_iso8601();
  write_manifest(dir, cfg, {}, false, started);

  RunArtifacts artifacts;
  const auto run = train_mixture(cfg, cfg.seed, true);
  for (std::size_t t = 0; t < run.snapshots.size(); ++t) {
    const std::string name = "mixture_after_task_" + std::to_string(t) + ".limx";
    run.snapshots[t].save((dir / name).string());
    artifacts.files.push_back(name);
  }
  run.mixture.save((dir / "mixture_final.limx").string());
  artifacts.files.push_back("mixture_final.limx");
  emit_metrics(dir, cfg, run, artifacts.files);
  emit_gate_log(dir, run, artifacts.files);
  write_manifest(dir, cfg, artifacts.files, true, started);
  return artifacts;
}

RunArtifacts run_compare(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const std::string started = now_iso8601();
  write_manifest(dir, cfg, {}, false, started);

  RunArtifacts artifacts;
  const auto core = run_compare_core(cfg, cfg.seed);
  for (std::size_t t = 0; t < core.limix.snapshots.size(); ++t) {
    const std::string name = "mixture_after_task_" + std::to_string(t) + ".limx";
    core.limix.snapshots[t].save((dir / name).string());
    artifacts.files.push_back(name);
  }
  for (std::size_t t = 0; t < core.grm.snapshots.size(); ++t) {
    const std::string name = "grm_after_task_" + std::to_string(t) + ".limx";
    core.grm.snapshots[t].save((dir / name).string());
    artifacts.files.push_back(name);
  }
  emit_metrics(dir, cfg, core.limix, artifacts.files);
  emit_gate_log(dir, core.limix, artifacts.files);
  emit_series(dir, core, artifacts.files);
  {
    CsvWriter csv((dir / "totals.csv").string(),
                  {"model", "K", "t", "card_B", "card_Bprime", "v", "total"});
    emit_ledger_row(csv, "grm", core.grm_analysis);
    emit_ledger_row(csv, "limix", core.mix_analysis);
    artifacts.files.push_back("totals.csv");
  }
  {
    CsvWriter csv((dir / "risk_terms.csv").string(),
                  {"experiment", "task", "generation", "term", "value", "seed"});
    emit_analysis_rows(csv, "grm", core.grm_analysis, cfg.seed);
    emit_analysis_rows(csv, "limix", core.mix_analysis, cfg.seed);
    artifacts.files.push_back("risk_terms.csv");
  }
  if (cfg.fig3c) {
    const auto rows = grm_epoch_risk_series(cfg, cfg.seed);
    CsvWriter csv((dir / "fig3c.csv").string(),
                  {"task", "epoch", "target_risk", "source_risk", "psi"});
    for (const auto& r : rows)
      csv.write_row({fmt_num(r.task), fmt_num(r.epoch), fmt_num(r.target),
                     fmt_num(r.source), fmt_num(r.psi)});
    artifacts.files.push_back("fig3c.csv");
  }
  write_manifest(dir, cfg, artifacts.files, true, started);
  return artifacts;
}

RunArtifacts run_analyze(const ExperimentConfig& cfg, const std::string& checkpoints_dir) {
  const fs::path ckpt(checkpoints_dir);
  if (!fs::exists(ckpt))
    throw MissingArtifactError("checkpoints directory not found: " + checkpoints_dir);
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const std::string started = now_iso8601();
  write_manifest(dir, cfg, {}, false, started);

  const auto stream = cfg.stream();
  std::vector<Mixture> mix_snapshots;
  for (int t = 0; t < cfg.n_tasks; ++t) {
    const fs::path p = ckpt / ("mixture_after_task_" + std::to_string(t) + ".limx");
    if (!fs::exists(p))
      throw MissingArtifactError("missing checkpoint: " + p.string());
    mix_snapshots.push_back(Mixture::load(p.string()));
  }
  std::vector<GrmModel> grm_snapshots;
  for (int t = 0; t < cfg.n_tasks; ++t) {
    const fs::path p = ckpt / ("grm_after_task_" + std::to_string(t) + ".limx");
    if (!fs::exists(p)) break;
    grm_snapshots.push_back(GrmModel::load(p.string()));
  }

  RunArtifacts artifacts;
  const std::uint64_t aseed = derive_seed(cfg.seed, {0xA7A});
  const auto mix_analysis =
      analyze_mixture(mix_snapshots, mix_snapshots.back(), stream, cfg, aseed);
  std::optional<ModelAnalysis> grm_analysis;
  if (static_cast<int>(grm_snapshots.size()) == cfg.n_tasks) {
    GrmRun run{stream, grm_snapshots.back(), grm_snapshots};
    grm_analysis = analyze_grm(run, cfg, aseed);
  }
  {
    CsvWriter csv((dir / "risk_terms.csv").string(),
                  {"experiment", "task", "generation", "term", "value", "seed"});
    emit_analysis_rows(csv, "limix", mix_analysis, cfg.seed);
    if (grm_analysis) emit_analysis_rows(csv, "grm", *grm_analysis, cfg.seed);
    artifacts.files.push_back("risk_terms.csv");
  }
  {
    CsvWriter csv((dir / "ledger.csv").string(),
                  {"model", "K", "t", "card_B", "card_Bprime", "v", "total"});
    emit_ledger_row(csv, "limix", mix_analysis);
    if (grm_analysis) emit_ledger_row(csv, "grm", *grm_analysis);
    artifacts.files.push_back("ledger.csv");
  }
  if (cfg.order_perms >= 2) {
    std::vector<std::vector<int>> perms;
    std::vector<int> identity(cfg.n_tasks);
    std::iota(identity.begin(), identity.end(), 0);
    perms.push_back(identity);
    std::vector<int> reversed(identity.rbegin(), identity.rend());
    perms.push_back(reversed);
    RngEngine rng(derive_seed(cfg.seed, {0x02de2}));
    while (static_cast<int>(perms.size()) < cfg.order_perms) {
      std::vector<int> p = identity;
      for (int i = cfg.n_tasks - 1; i > 0; --i) std::swap(p[i], p[uniform_int(rng, i + 1)]);
      perms.push_back(p);
    }
    const auto rows = order_sensitivity(cfg, cfg.seed, perms);
    CsvWriter csv((dir / "orders.csv").string(), {"order", "components", "mixture_total"});
    for (const auto& r : rows)
      csv.write_row({order_string(r.order), fmt_num(r.components), fmt_num(r.mixture_total)});
    artifacts.files.push_back("orders.csv");
  }
  write_manifest(dir, cfg, artifacts.files, true, started);
  return artifacts;
}

RunArtifacts run_distill(const ExperimentConfig& cfg, const std::string& checkpoint_dir) {
  if (cfg.stream_params.supervised)
    throw ConfigError("distill requires an unsupervised stream config");
  const fs::path ckpt(checkpoint_dir);
  if (!fs::exists(ckpt))
    throw MissingArtifactError("checkpoint directory not found: " + checkpoint_dir);
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const std::string started = now_iso8601();
  write_manifest(dir, cfg, {}, false, started);

  const auto stream = cfg.stream();
  std::vector<Mixture> snapshots;
  for (int t = 0; t < cfg.n_tasks; ++t) {
    const fs::path p = ckpt / ("mixture_after_task_" + std::to_string(t) + ".limx");
    if (!fs::exists(p)) throw MissingArtifactError("missing checkpoint: " + p.string());
    snapshots.push_back(Mixture::load(p.string()));
  }
  const Mixture& final_mix = snapshots.back();
  StudentModel student = final_mix.make_student(derive_seed(cfg.seed, {0x57D}));
  RngEngine rng(derive_seed(cfg.seed, {0x57E}));
  for (int t = 0; t < cfg.n_tasks; ++t) {
    const auto data = generate_task(stream.tasks[t]);
    log_info("distill: task " + std::to_string(t));
    snapshots[t].distill_student(student, data.train, cfg.distill_replay,
                                 cfg.distill_epochs, rng);
  }

  RunArtifacts artifacts;
  const std::uint64_t eval_seed = derive_seed(cfg.seed, {0xE7A1});
  CsvWriter csv((dir / "distill.csv").string(),
                {"task", "mixture_elbo", "student_elbo", "deficit"});
  for (int t = 0; t < cfg.n_tasks; ++t) {
    const auto row = final_mix.evaluate_task(stream.tasks[t], t, eval_seed);
    const auto data = generate_task(stream.tasks[t]);
    double selbo = 0;
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      RngEngine erng(derive_seed(eval_seed, {0x57F, static_cast<std::uint64_t>(t), i}));
      selbo += final_mix.student_elbo(student, data.test[i], cfg.n_mc_eval, erng);
    }
    selbo /= static_cast<double>(data.test.size());
    csv.write_row({fmt_num(t), fmt_num(row.elbo), fmt_num(selbo),
                   fmt_num(row.elbo - selbo)});
  }
  artifacts.files.push_back("distill.csv");

  // Self-contained student checkpoint: trunk + student head.
  {
    ParamSet file;
    Tensor arch;
    arch.name = "meta.arch";
    arch.shape = {4};
    arch.data = {static_cast<double>(final_mix.config.d_x),
                 static_cast<double>(final_mix.config.d_z),
                 static_cast<double>(final_mix.config.hidden),
                 static_cast<double>(cfg.n_mc_eval)};
    file.tensors.push_back(arch);
    for (const auto& t : final_mix.shared.tensors) {
      Tensor copy = t;
      copy.name = "shared." + t.name;
      file.tensors.push_back(std::move(copy));
    }
    for (const auto& t : student.indiv.tensors) {
      Tensor copy = t;
      copy.name = "student." + t.name;
      file.tensors.push_back(std::move(copy));
    }
    write_tensor_file((dir / "student.limx").string(), {&file});
    artifacts.files.push_back("student.limx");
  }
  write_manifest(dir, cfg, artifacts.files, true, started);
  return artifacts;
}

double student_checkpoint_elbo(const std::string& path, const Sample& s, int n_mc,
                               std::uint64_t seed) {
  const ParamSet file = read_tensor_file(path);
  ParamSet trunk, head;
  for (const auto& t : file.tensors) {
    if (t.name.rfind("shared.", 0) == 0) {
      Tensor copy = t;
      copy.name = t.name.substr(7);
      trunk.tensors.push_back(std::move(copy));
    } else if (t.name.rfind("student.", 0) == 0) {
      Tensor copy = t;
      copy.name = t.name.substr(8);
      head.tensors.push_back(std::move(copy));
    }
  }
  if (trunk.tensors.empty() || head.tensors.empty())
    throw MissingArtifactError("not a student checkpoint: " + path);
  MlpView enc, dec;
  enc.append(trunk, nullptr, "enc");
  enc.append(head, nullptr, "enc_head");
  dec.append(trunk, nullptr, "dec");
  dec.append(head, nullptr, "dec_head");
  RngEngine rng(derive_seed(seed, {0x57F}));
  return generator_objective(enc, dec, s.features, {}, n_mc, rng).total;
}

RunArtifacts run_sweep(const ExperimentConfig& cfg, const std::string& param,
                       const std::vector<double>& values) {
  if (param != "gate.V" && param != "gate.a")
    throw ConfigError("sweep supports gate.V and gate.a, got: " + param);
  if (values.empty()) throw ConfigError("sweep: no values given");
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const std::string started = now_iso8601();
  write_manifest(dir, cfg, {}, false, started);

  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());

  RunArtifacts artifacts;
  CsvWriter csv((dir / "sweep.csv").string(),
                {"param", "value", "components", "avg_mse", "avg_elbo", "avg_accuracy"});
  for (double v : sorted) {
    ExperimentConfig c = cfg;
    if (param == "gate.V")
      c.gate_v = v;
    else
      c.gate_a = v;
    const auto run = train_mixture(c, c.seed, false);
    const auto& final_rows = run.eval_tables.back();
    double mse = 0, elbo = 0, acc = 0;
    bool has_acc = true;
    for (const auto& row : final_rows) {
      mse += row.mse / final_rows.size();
      elbo += row.elbo / final_rows.size();
      if (row.accuracy)
        acc += *row.accuracy / final_rows.size();
      else
        has_acc = false;
    }
    csv.write_row({param, fmt_num(v), fmt_num(run.mixture.component_count()),
                   fmt_num(mse), fmt_num(elbo), has_acc ? fmt_num(acc) : ""});
    log_info("sweep " + param + "=" + fmt_num(v) + " -> K=" +
             std::to_string(run.mixture.component_count()));
  }
  artifacts.files.push_back("sweep.csv");
  write_manifest(dir, cfg, artifacts.files, true, started);
  return artifacts;
}

}  // namespace limix
