#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prost/env.hpp"
#include "prost/forecaster.hpp"
#include "prost/planner.hpp"
#include "prost/regret.hpp"
#include "prost/tempo.hpp"

namespace prost {

enum class ForecasterKind { kSwLse, kWLse, kScalarStructural };
enum class PlanSource { kFixed, kTempoOptimizer };
enum class AgentKind { kProstT, kReactiveModel, kFullHistory, kOracleFuture, kOnlineQFinetune };

std::string to_string(ForecasterKind kind);
std::string to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& name);

struct RunConfig {
  // Environment selection.
  std::string env_kind = "sine_chain";  // sine_chain | file_chain | goal_reacher
  ChainConfig chain;
  int sine_speed = 1;
  std::string drift_file;
  GoalReacherConfig reacher;
  double reacher_period_episodes = 2500.0;
  double drift_noise_bound = 0.0;
  double wall_clock_horizon = 0.0;  // 0: derived from the fixed plan

  HyperParams hp;
  bool auto_eta = true;   // eta = (1-gamma)/tau (1.0 when tau = 0)
  bool auto_beta = true;  // beta = max(beta_floor, 1e-3)

  PlanSource plan_source = PlanSource::kFixed;
  std::size_t delta_pi = 1;
  double t1 = -1.0;  // < 0: defaults to (window+1) * delta_pi
  std::size_t episodes = 30;

  ForecasterKind forecaster = ForecasterKind::kSwLse;
  std::size_t window = 3;
  ScalarForecaster scalar;
  WlseConfig wlse;
  bool cold_start = false;  // uniform policy each episode instead of warm start

  EvalNoise noise;
  double q_learning_step = 0.1;  // online_q_finetune baseline

  bool record_prediction_errors = true;
  bool record_convergence_trace = false;
  bool record_policies = false;

  std::uint64_t seed = 1;
  std::string out_dir;
  std::string name = "run";

  EnvDefinition build_env() const;
  HyperParams resolved_hp(const EnvDefinition& env) const;
  void validate() const;
};

struct EpisodeRow {
  std::size_t k = 0;
  double t = 0.0;
  double o_clean = 0.0;
  double o_noisy = 0.0;
  double realized_return = 0.0;
  double v_star = 0.0;
  double v_pi = 0.0;
  double gap = 0.0;
  double cum_regret = 0.0;
  double iota_kh_sum = 0.0;
  double iota_bar_inf = 0.0;
  double max_reward_error = 0.0;
  double max_p_row_l1_error = 0.0;
  double mean_bonus = 0.0;
  std::string policy_digest;
};

// Self-contained result of one run; re-analysis needs no live environment.
struct RunRecord {
  int schema_version = 1;
  RunConfig config;
  AgentKind agent = AgentKind::kProstT;
  TempoPlan plan;
  HyperParams hp;  // resolved values actually used
  std::vector<EpisodeRow> rows;
  std::vector<Trajectory> trajectories;          // main episodes only
  std::vector<Trajectory> warmup_trajectories;
  std::vector<double> warmup_times;
  BudgetSteps measured_steps;                    // along the main plan times
  double b_r_measured = 0.0;
  double b_p_measured = 0.0;
  double mean_last10_reward = 0.0;
  double cumulative_regret = 0.0;
  std::vector<std::vector<double>> q_gap_traces;  // per episode, when recorded
  std::vector<std::vector<double>> kl_traces;
  std::vector<std::vector<double>> policy_logits;  // executed logits, when recorded
  std::vector<std::string> event_log;  // episode-loop ordering trace
  std::string error;  // nonempty when a sweep cell failed

  bool failed() const { return !error.empty(); }
};

RunRecord run_prost_t(const RunConfig& config);
RunRecord run_baseline(const RunConfig& config, AgentKind kind);

// Cross product of config overrides; keys are iterated in sorted order and
// the cell seed is base seed xor cell index unless the grid sweeps "seed"
// itself. Cell failures are isolated into the record's error field.
struct SweepGrid {
  std::map<std::string, std::vector<double>> numeric;
  std::map<std::string, std::vector<std::string>> text;
};

std::vector<RunRecord> sweep(const RunConfig& base, const SweepGrid& grid,
                             AgentKind kind = AgentKind::kProstT, bool parallel = true);

enum class ExportFormat { kCsv, kJson, kPlotData };

// csv: ledger + forecast diagnostics (+ convergence traces when recorded);
// json: one manifest per record; plotdata: long-format series,x,y,lo,hi with
// mean and 95% bands across seed groups.
void export_records(const std::vector<RunRecord>& records, ExportFormat format,
                    const std::string& out_dir);

// Serialization (used by the CLI and the round-trip contract).
std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& text);
std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& text);
std::string tempo_plan_to_json(const TempoPlan& plan);
std::string bound_report_to_json(const BoundReport& report);

// Tempo planning for a config: analytic pilot budgets, drifting constants,
// feasibility, numeric argmin with closed-form cross-check.
TempoPlan plan_tempo(const RunConfig& config);

// Post-hoc bound recomputation from a completed record.
BoundReport bounds_for_record(const RunRecord& record);

// Initial-state distribution (Dirac at the environment's initial state).
std::vector<double> initial_distribution(const EnvDefinition& env);

}  // namespace prost
