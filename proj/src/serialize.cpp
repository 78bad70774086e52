#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "prost/harness.hpp"

namespace prost {

namespace {

using Json = nlohmann::ordered_json;

Json hp_to_json(const HyperParams& hp) {
  return Json{{"eta", hp.eta},
              {"tau", hp.tau},
              {"gamma", hp.gamma},
              {"lambda", hp.lambda},
              {"beta", hp.beta},
              {"delta", hp.delta},
              {"epsilon", hp.epsilon},
              {"confidence", hp.confidence},
              {"horizon", hp.horizon},
              {"total_wall_clock", hp.total_wall_clock},
              {"r_max", hp.r_max},
              {"r_tilde_max", hp.r_tilde_max},
              {"n_actions", hp.n_actions},
              {"n_states", hp.n_states},
              {"theta_log_cap", hp.theta_log_cap}};
}

HyperParams hp_from_json(const Json& j) {
  HyperParams hp;
  hp.eta = j.value("eta", hp.eta);
  hp.tau = j.value("tau", hp.tau);
  hp.gamma = j.value("gamma", hp.gamma);
  hp.lambda = j.value("lambda", hp.lambda);
  hp.beta = j.value("beta", hp.beta);
  hp.delta = j.value("delta", hp.delta);
  hp.epsilon = j.value("epsilon", hp.epsilon);
  hp.confidence = j.value("confidence", hp.confidence);
  hp.horizon = j.value("horizon", hp.horizon);
  hp.total_wall_clock = j.value("total_wall_clock", hp.total_wall_clock);
  hp.r_max = j.value("r_max", hp.r_max);
  hp.r_tilde_max = j.value("r_tilde_max", hp.r_tilde_max);
  hp.n_actions = j.value("n_actions", hp.n_actions);
  hp.n_states = j.value("n_states", hp.n_states);
  hp.theta_log_cap = j.value("theta_log_cap", hp.theta_log_cap);
  return hp;
}

Json config_to_json_obj(const RunConfig& c) {
  Json j;
  j["env"] = Json{{"kind", c.env_kind},
                  {"sine_speed", c.sine_speed},
                  {"drift_file", c.drift_file},
                  {"noise_bound", c.drift_noise_bound},
                  {"wall_clock_horizon", c.wall_clock_horizon},
                  {"chain", Json{{"n_states", c.chain.n_states},
                                 {"horizon", c.chain.horizon},
                                 {"gamma", c.chain.gamma},
                                 {"p_move", c.chain.p_move},
                                 {"forward_reward", c.chain.forward_reward}}},
                  {"reacher", Json{{"grid_size", c.reacher.grid_size},
                                   {"horizon", c.reacher.horizon},
                                   {"gamma", c.reacher.gamma},
                                   {"goal_reward", c.reacher.goal_reward},
                                   {"step_reward", c.reacher.step_reward},
                                   {"goal_radius", c.reacher.goal_radius},
                                   {"p_slip", c.reacher.p_slip},
                                   {"period_episodes", c.reacher_period_episodes}}}};
  j["hp"] = hp_to_json(c.hp);
  j["auto_eta"] = c.auto_eta;
  j["auto_beta"] = c.auto_beta;
  j["plan"] = Json{{"source", c.plan_source == PlanSource::kFixed ? "fixed" : "tempo_optimizer"},
                   {"delta_pi", c.delta_pi},
                   {"t1", c.t1},
                   {"episodes", c.episodes}};
  j["forecaster"] =
      Json{{"kind", to_string(c.forecaster)},
           {"window", c.window},
           {"scalar", Json{{"kind", c.scalar.kind == ScalarForecaster::Kind::kArLs
                                        ? "ar_ls"
                                        : "simple_average"},
                           {"window", c.scalar.window},
                           {"ar_order", c.scalar.ar_order},
                           {"ar_diff", c.scalar.ar_diff}}},
           {"wlse", Json{{"c_disc", c.wlse.c_disc},
                         {"max_alternations", c.wlse.max_alternations},
                         {"tol", c.wlse.tol}}},
           {"cold_start", c.cold_start}};
  const char* noise_mode = c.noise.mode == EvalNoise::Mode::kNone ? "none"
                           : c.noise.mode == EvalNoise::Mode::kBoundedUniform
                               ? "bounded_uniform"
                               : "monte_carlo";
  j["noise"] = Json{{"mode", noise_mode},
                    {"delta", c.noise.delta},
                    {"samples", c.noise.samples},
                    {"rollout_len", c.noise.rollout_len}};
  j["q_learning_step"] = c.q_learning_step;
  j["record"] = Json{{"prediction_errors", c.record_prediction_errors},
                     {"convergence_trace", c.record_convergence_trace},
                     {"policies", c.record_policies}};
  j["seed"] = c.seed;
  j["out"] = c.out_dir;
  j["name"] = c.name;
  return j;
}

RunConfig config_from_json_obj(const Json& j) {
  RunConfig c;
  if (j.contains("env")) {
    const Json& env = j["env"];
    c.env_kind = env.value("kind", c.env_kind);
    c.sine_speed = env.value("sine_speed", c.sine_speed);
    c.drift_file = env.value("drift_file", c.drift_file);
    c.drift_noise_bound = env.value("noise_bound", c.drift_noise_bound);
    c.wall_clock_horizon = env.value("wall_clock_horizon", c.wall_clock_horizon);
    if (env.contains("chain")) {
      const Json& chain = env["chain"];
      c.chain.n_states = chain.value("n_states", c.chain.n_states);
      c.chain.horizon = chain.value("horizon", c.chain.horizon);
      c.chain.gamma = chain.value("gamma", c.chain.gamma);
      c.chain.p_move = chain.value("p_move", c.chain.p_move);
      c.chain.forward_reward = chain.value("forward_reward", c.chain.forward_reward);
    }
    if (env.contains("reacher")) {
      const Json& reacher = env["reacher"];
      c.reacher.grid_size = reacher.value("grid_size", c.reacher.grid_size);
      c.reacher.horizon = reacher.value("horizon", c.reacher.horizon);
      c.reacher.gamma = reacher.value("gamma", c.reacher.gamma);
      c.reacher.goal_reward = reacher.value("goal_reward", c.reacher.goal_reward);
      c.reacher.step_reward = reacher.value("step_reward", c.reacher.step_reward);
      c.reacher.goal_radius = reacher.value("goal_radius", c.reacher.goal_radius);
      c.reacher.p_slip = reacher.value("p_slip", c.reacher.p_slip);
      c.reacher_period_episodes = reacher.value("period_episodes", c.reacher_period_episodes);
    }
  }
  if (j.contains("hp")) c.hp = hp_from_json(j["hp"]);
  c.auto_eta = j.value("auto_eta", c.auto_eta);
  c.auto_beta = j.value("auto_beta", c.auto_beta);
  if (j.contains("plan")) {
    const Json& plan = j["plan"];
    const std::string source = plan.value("source", std::string("fixed"));
    if (source == "fixed") {
      c.plan_source = PlanSource::kFixed;
    } else if (source == "tempo_optimizer") {
      c.plan_source = PlanSource::kTempoOptimizer;
    } else {
      throw std::invalid_argument("config: unknown plan source " + source);
    }
    c.delta_pi = plan.value("delta_pi", c.delta_pi);
    c.t1 = plan.value("t1", c.t1);
    c.episodes = plan.value("episodes", c.episodes);
  }
  if (j.contains("forecaster")) {
    const Json& fc = j["forecaster"];
    const std::string kind = fc.value("kind", std::string("sw_lse"));
    if (kind == "sw_lse") {
      c.forecaster = ForecasterKind::kSwLse;
    } else if (kind == "w_lse") {
      c.forecaster = ForecasterKind::kWLse;
    } else if (kind == "scalar_structural") {
      c.forecaster = ForecasterKind::kScalarStructural;
    } else {
      throw std::invalid_argument("config: unknown forecaster kind " + kind);
    }
    c.window = fc.value("window", c.window);
    if (fc.contains("scalar")) {
      const Json& scalar = fc["scalar"];
      const std::string skind = scalar.value("kind", std::string("simple_average"));
      if (skind == "ar_ls") {
        c.scalar.kind = ScalarForecaster::Kind::kArLs;
      } else if (skind == "simple_average") {
        c.scalar.kind = ScalarForecaster::Kind::kSimpleAverage;
      } else {
        throw std::invalid_argument("config: unknown scalar forecaster " + skind);
      }
      c.scalar.window = scalar.value("window", c.scalar.window);
      c.scalar.ar_order = scalar.value("ar_order", c.scalar.ar_order);
      c.scalar.ar_diff = scalar.value("ar_diff", c.scalar.ar_diff);
    }
    if (fc.contains("wlse")) {
      const Json& wlse = fc["wlse"];
      c.wlse.c_disc = wlse.value("c_disc", c.wlse.c_disc);
      c.wlse.max_alternations = wlse.value("max_alternations", c.wlse.max_alternations);
      c.wlse.tol = wlse.value("tol", c.wlse.tol);
    }
    c.cold_start = fc.value("cold_start", c.cold_start);
  }
  if (j.contains("noise")) {
    const Json& noise = j["noise"];
    const std::string mode = noise.value("mode", std::string("none"));
    if (mode == "none") {
      c.noise.mode = EvalNoise::Mode::kNone;
    } else if (mode == "bounded_uniform") {
      c.noise.mode = EvalNoise::Mode::kBoundedUniform;
    } else if (mode == "monte_carlo") {
      c.noise.mode = EvalNoise::Mode::kMonteCarlo;
    } else {
      throw std::invalid_argument("config: unknown noise mode " + mode);
    }
    c.noise.delta = noise.value("delta", c.noise.delta);
    c.noise.samples = noise.value("samples", c.noise.samples);
    c.noise.rollout_len = noise.value("rollout_len", c.noise.rollout_len);
  }
  c.q_learning_step = j.value("q_learning_step", c.q_learning_step);
  if (j.contains("record")) {
    c.record_prediction_errors =
        j["record"].value("prediction_errors", c.record_prediction_errors);
    c.record_convergence_trace =
        j["record"].value("convergence_trace", c.record_convergence_trace);
    c.record_policies = j["record"].value("policies", c.record_policies);
  }
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out", c.out_dir);
  c.name = j.value("name", c.name);
  return c;
}

Json plan_to_json_obj(const TempoPlan& plan) {
  return Json{{"delta_pi_star", plan.delta_pi_star}, {"k_star", plan.k_star},
              {"times", plan.times},                 {"case_id", plan.case_id},
              {"k_env", plan.k_env},                 {"k_agent", plan.k_agent},
              {"bound_at_star", plan.bound_at_star}};
}

TempoPlan plan_from_json_obj(const Json& j) {
  TempoPlan plan;
  plan.delta_pi_star = j.value("delta_pi_star", plan.delta_pi_star);
  plan.k_star = j.value("k_star", plan.k_star);
  plan.times = j.value("times", plan.times);
  plan.case_id = j.value("case_id", plan.case_id);
  plan.k_env = j.value("k_env", plan.k_env);
  plan.k_agent = j.value("k_agent", plan.k_agent);
  plan.bound_at_star = j.value("bound_at_star", plan.bound_at_star);
  return plan;
}

Json row_to_json(const EpisodeRow& row) {
  return Json{{"k", row.k},
              {"t", row.t},
              {"o_clean", row.o_clean},
              {"o_noisy", row.o_noisy},
              {"realized_return", row.realized_return},
              {"v_star", row.v_star},
              {"v_pi", row.v_pi},
              {"gap", row.gap},
              {"cum_regret", row.cum_regret},
              {"iota_kh_sum", row.iota_kh_sum},
              {"iota_bar_inf", row.iota_bar_inf},
              {"max_reward_error", row.max_reward_error},
              {"max_p_row_l1_error", row.max_p_row_l1_error},
              {"mean_bonus", row.mean_bonus},
              {"policy_digest", row.policy_digest}};
}

EpisodeRow row_from_json(const Json& j) {
  EpisodeRow row;
  row.k = j.value("k", row.k);
  row.t = j.value("t", row.t);
  row.o_clean = j.value("o_clean", row.o_clean);
  row.o_noisy = j.value("o_noisy", row.o_noisy);
  row.realized_return = j.value("realized_return", row.realized_return);
  row.v_star = j.value("v_star", row.v_star);
  row.v_pi = j.value("v_pi", row.v_pi);
  row.gap = j.value("gap", row.gap);
  row.cum_regret = j.value("cum_regret", row.cum_regret);
  row.iota_kh_sum = j.value("iota_kh_sum", row.iota_kh_sum);
  row.iota_bar_inf = j.value("iota_bar_inf", row.iota_bar_inf);
  row.max_reward_error = j.value("max_reward_error", row.max_reward_error);
  row.max_p_row_l1_error = j.value("max_p_row_l1_error", row.max_p_row_l1_error);
  row.mean_bonus = j.value("mean_bonus", row.mean_bonus);
  row.policy_digest = j.value("policy_digest", row.policy_digest);
  return row;
}

}  // namespace

std::string run_config_to_json(const RunConfig& config) {
  return config_to_json_obj(config).dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
  return config_from_json_obj(Json::parse(text));
}

std::string tempo_plan_to_json(const TempoPlan& plan) { return plan_to_json_obj(plan).dump(2); }

std::string run_record_to_json(const RunRecord& record) {
  Json j;
  j["schema_version"] = record.schema_version;
  j["agent"] = to_string(record.agent);
  j["config"] = config_to_json_obj(record.config);
  j["hp"] = hp_to_json(record.hp);
  j["plan"] = plan_to_json_obj(record.plan);
  j["rows"] = Json::array();
  for (const EpisodeRow& row : record.rows) j["rows"].push_back(row_to_json(row));
  j["trajectories"] = Json::array();
  for (const Trajectory& traj : record.trajectories) {
    Json steps = Json::array();
    for (const Step& step : traj) {
      steps.push_back(Json{{"s", step.state},
                           {"a", step.action},
                           {"r", step.reward},
                           {"sp", step.next_state}});
    }
    j["trajectories"].push_back(steps);
  }
  j["warmup_trajectories"] = Json::array();
  for (const Trajectory& traj : record.warmup_trajectories) {
    Json steps = Json::array();
    for (const Step& step : traj) {
      steps.push_back(Json{{"s", step.state},
                           {"a", step.action},
                           {"r", step.reward},
                           {"sp", step.next_state}});
    }
    j["warmup_trajectories"].push_back(steps);
  }
  j["warmup_times"] = record.warmup_times;
  j["measured_r_steps"] = record.measured_steps.r_steps;
  j["measured_p_steps"] = record.measured_steps.p_steps;
  j["b_r_measured"] = record.b_r_measured;
  j["b_p_measured"] = record.b_p_measured;
  j["mean_last10_reward"] = record.mean_last10_reward;
  j["cumulative_regret"] = record.cumulative_regret;
  j["policy_logits"] = record.policy_logits;
  j["q_gap_traces"] = record.q_gap_traces;
  j["kl_traces"] = record.kl_traces;
  j["event_log"] = record.event_log;
  j["error"] = record.error;
  return j.dump(2);
}

RunRecord run_record_from_json(const std::string& text) {
  const Json j = Json::parse(text);
  RunRecord record;
  record.schema_version = j.value("schema_version", record.schema_version);
  record.agent = agent_kind_from_string(j.value("agent", std::string("prost_t")));
  record.config = config_from_json_obj(j.at("config"));
  record.hp = hp_from_json(j.at("hp"));
  record.plan = plan_from_json_obj(j.at("plan"));
  for (const Json& row : j.value("rows", Json::array())) {
    record.rows.push_back(row_from_json(row));
  }
  for (const Json& traj : j.value("trajectories", Json::array())) {
    Trajectory steps;
    for (const Json& step : traj) {
      steps.push_back(Step{step.value("s", std::size_t{0}), step.value("a", std::size_t{0}),
                           step.value("r", 0.0), step.value("sp", std::size_t{0})});
    }
    record.trajectories.push_back(std::move(steps));
  }
  for (const Json& traj : j.value("warmup_trajectories", Json::array())) {
    Trajectory steps;
    for (const Json& step : traj) {
      steps.push_back(Step{step.value("s", std::size_t{0}), step.value("a", std::size_t{0}),
                           step.value("r", 0.0), step.value("sp", std::size_t{0})});
    }
    record.warmup_trajectories.push_back(std::move(steps));
  }
  record.warmup_times = j.value("warmup_times", record.warmup_times);
  record.measured_steps.r_steps = j.value("measured_r_steps", record.measured_steps.r_steps);
  record.measured_steps.p_steps = j.value("measured_p_steps", record.measured_steps.p_steps);
  record.b_r_measured = j.value("b_r_measured", record.b_r_measured);
  record.b_p_measured = j.value("b_p_measured", record.b_p_measured);
  record.mean_last10_reward = j.value("mean_last10_reward", record.mean_last10_reward);
  record.cumulative_regret = j.value("cumulative_regret", record.cumulative_regret);
  record.policy_logits = j.value("policy_logits", record.policy_logits);
  record.q_gap_traces = j.value("q_gap_traces", record.q_gap_traces);
  record.kl_traces = j.value("kl_traces", record.kl_traces);
  record.event_log = j.value("event_log", record.event_log);
  record.error = j.value("error", record.error);
  return record;
}

std::string bound_report_to_json(const BoundReport& report) {
  Json j{{"c_p", report.c_p},
         {"c1", report.c1},
         {"c2", report.c2},
         {"c_alg", report.c_alg},
         {"c_alg_tau", report.c_alg_tau},
         {"c_i_of_b", report.c_i_of_b},
         {"c_k", report.c_k},
         {"r_i_max", report.r_i_max},
         {"r_ii_max", report.r_ii_max},
         {"total_bound", report.total_bound},
         {"confidence", report.confidence},
         {"entropy_mode", report.entropy_mode},
         {"delta_pi", report.delta_pi},
         {"window", report.window},
         {"episodes", report.episodes},
         {"b_r", report.b_r},
         {"b_p", report.b_p},
         {"r_i_curve", report.r_i_curve},
         {"r_ii_curve", report.r_ii_curve}};
  return j.dump(2);
}

}  // namespace prost
