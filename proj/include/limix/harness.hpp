#pragma once

#include <optional>
#include <string>
#include <vector>

#include "limix/config.hpp"
#include "limix/grm.hpp"
#include "limix/mixture.hpp"
#include "limix/risk.hpp"
#include "limix/task_streams.hpp"

namespace limix {

// Typed view of a config file; unknown sections/keys are rejected at parse
// time, missing required sections named in the error.
struct ExperimentConfig {
  // [stream]
  StreamKind kind = StreamKind::MsfirAnalog;
  int n_tasks = 5;
  std::uint64_t seed = 1;
  StreamParams stream_params;
  // [model]
  int hidden = 64;
  int d_z = 4;
  double lr = 1e-3;
  int epochs = 15;
  int batch = 64;
  int n_mc_train = 1;
  int n_mc_eval = 16;
  int task_code_dim = 8;
  int distill_replay = 200;
  int distill_epochs = 10;
  // [gate]
  double gate_a = 1.0;
  double gate_v = 3.0;
  int gate_n_g = 64;
  int gate_n_mc = 2;
  bool force_expand = false;
  // [analysis]
  HypothesisClass::Family family = HypothesisClass::Family::Linear;
  int h_width = 16;
  int psi_restarts = 8;
  int psi_steps = 300;
  int psi_n_eval = 1000;
  int ideal_draws = 5000;
  int ideal_steps = 300;
  int risk_n = 2000;
  int series_n = 200;
  int order_perms = 0;
  bool fig3c = false;
  // [output]
  std::string out_dir = "out";

  std::uint64_t config_hash = 0;
  std::string raw_text;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_ini(const IniDoc& ini);

  ModelConfig model_config(bool supervised) const;
  GateConfig gate_config() const;
  TaskStream stream() const;
  HypothesisClass hypothesis_class(int d_x, int n_classes) const;
  AnalysisBudget analysis_budget(std::uint64_t analysis_seed) const;
  std::string stream_id() const;
};

// ---- in-memory pipelines (also driven by the acceptance suite) ----

using SeriesHook = std::function<void(int task, int epoch)>;

struct TrainRun {
  TaskStream stream;
  Mixture mixture;
  std::vector<Mixture> snapshots;  // state after each task
  std::vector<std::vector<EvalRow>> eval_tables;  // evaluate_stream after each task
};

TrainRun train_mixture(const ExperimentConfig& cfg, std::uint64_t seed,
                       bool keep_snapshots, bool force_expand_override = false,
                       const SeriesHook& hook = nullptr);

struct GrmRun {
  TaskStream stream;
  GrmModel model;
  std::vector<GrmModel> snapshots;
};

GrmRun train_grm(const ExperimentConfig& cfg, std::uint64_t seed,
                 const SeriesHook& hook = nullptr);

// Distribution handles for the theory instruments.
DistHandle real_handle(const TaskStream& stream, int task);        // S_i
DistHandle train_data_handle(const TaskStream& stream, int task);  // S~_i^(1)
// Definition-1 chains [S_i, S~^(1), ..., S~^(t-i)] built from per-task model
// snapshots.
std::vector<DistHandle> grm_chain(const std::vector<GrmModel>& snapshots,
                                  const TaskStream& stream, int task);
std::vector<DistHandle> mixture_chain(const std::vector<Mixture>& snapshots,
                                      const TaskStream& stream, int task);

// Deterministic classifier wrappers of the trained models.
Classifier grm_classifier(const GrmModel& model);
Classifier mixture_classifier(const Mixture& mix);

BoundLedger grm_ledger(int n_tasks);
BoundLedger mixture_ledger(const Mixture& mix, int n_tasks);

struct ModelAnalysis {
  std::vector<BoundChainReport> reports;
  BoundLedger ledger;
  double total = 0;
};
ModelAnalysis analyze_grm(const GrmRun& run, const ExperimentConfig& cfg,
                          std::uint64_t analysis_seed);
ModelAnalysis analyze_mixture(const std::vector<Mixture>& snapshots,
                              const Mixture& final_mix, const TaskStream& stream,
                              const ExperimentConfig& cfg, std::uint64_t analysis_seed);

struct SeriesPoint {
  int task = 0;
  int epoch = 0;
  double risk0 = 0;  // task-1 (index 0) target risk
};

struct CompareRun {
  TrainRun limix;
  TrainRun control;  // fixed fresh-component control
  GrmRun grm;
  std::vector<SeriesPoint> limix_series, control_series, grm_series;
  ModelAnalysis grm_analysis, mix_analysis;
  LifelongTotals totals;
};
CompareRun run_compare_core(const ExperimentConfig& cfg, std::uint64_t seed);

struct Fig3cPoint {
  int task = 0, epoch = 0;
  double target = 0, source = 0, psi = 0;
};
// Per-epoch target/source risk and discrepancy for the first task under the
// single GRM model.
std::vector<Fig3cPoint> grm_epoch_risk_series(const ExperimentConfig& cfg,
                                              std::uint64_t seed);

struct Fig3dReport {
  double target = 0, source = 0, psi = 0, sigma = 0;
};
// First-task decomposition for a fresh-component mixture at end of stream.
Fig3dReport fig3d_check(const Mixture& mix, const TaskStream& stream,
                        const ExperimentConfig& cfg, std::uint64_t analysis_seed);

struct OrderRow {
  std::vector<int> order;
  int components = 0;
  double mixture_total = 0;
};
std::vector<OrderRow> order_sensitivity(const ExperimentConfig& cfg, std::uint64_t seed,
                                        const std::vector<std::vector<int>>& permutations);

// ---- file-emitting drivers used by the CLI ----

struct RunArtifacts {
  std::vector<std::string> files;  // paths written (relative to out_dir)
};

RunArtifacts run_train(const ExperimentConfig& cfg);
RunArtifacts run_compare(const ExperimentConfig& cfg);
RunArtifacts run_analyze(const ExperimentConfig& cfg, const std::string& checkpoints_dir);
RunArtifacts run_distill(const ExperimentConfig& cfg, const std::string& checkpoint_dir);
RunArtifacts run_sweep(const ExperimentConfig& cfg, const std::string& param,
                       const std::vector<double>& values);

// Re-evaluates a saved Student checkpoint (trunk + head) on one sample.
double student_checkpoint_elbo(const std::string& path, const Sample& s, int n_mc,
                               std::uint64_t seed);

// LIMIX_LOG-gated progress logging (levels: silent < info < debug).
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace limix
