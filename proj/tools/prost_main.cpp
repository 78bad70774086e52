#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "prost/csv.hpp"
#include "prost/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRunError = 2;
constexpr int kExitPartialSweep = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

prost::RunConfig load_config(const std::string& path, long long seed_override,
                             const std::string& out_override) {
  prost::RunConfig config = prost::run_config_from_json(slurp(path));
  if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
  if (!out_override.empty()) config.out_dir = out_override;
  if (config.out_dir.empty()) config.out_dir = "out";
  config.validate();
  return config;
}

prost::SweepGrid load_grid(const std::string& path) {
  const nlohmann::json j = nlohmann::json::parse(slurp(path));
  prost::SweepGrid grid;
  for (const auto& [key, values] : j.items()) {
    if (!values.is_array() || values.empty()) {
      throw std::invalid_argument("grid axis " + key + " must be a nonempty array");
    }
    if (values.front().is_string()) {
      grid.text[key] = values.get<std::vector<std::string>>();
    } else {
      grid.numeric[key] = values.get<std::vector<double>>();
    }
  }
  return grid;
}

void export_all(const std::vector<prost::RunRecord>& records, const std::string& out_dir) {
  prost::export_records(records, prost::ExportFormat::kCsv, out_dir);
  prost::export_records(records, prost::ExportFormat::kJson, out_dir);
  prost::export_records(records, prost::ExportFormat::kPlotData, out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ProST non-stationary RL laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string grid_path;
  std::string record_path;
  std::string out_dir;
  std::string baseline_kind = "reactive_model";
  long long seed_override = -1;

  CLI::App* cmd_run = app.add_subcommand("run", "Run ProST-T with a config file");
  cmd_run->add_option("--config", config_path, "JSON run config")->required();
  cmd_run->add_option("--seed", seed_override, "Seed override");
  cmd_run->add_option("--out", out_dir, "Output directory override");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "Run a config grid");
  cmd_sweep->add_option("--config", config_path, "JSON run config")->required();
  cmd_sweep->add_option("--grid", grid_path, "JSON grid of overrides")->required();
  cmd_sweep->add_option("--seed", seed_override, "Seed override");
  cmd_sweep->add_option("--out", out_dir, "Output directory override");

  CLI::App* cmd_baseline = app.add_subcommand("baseline", "Run a baseline agent");
  cmd_baseline->add_option("--config", config_path, "JSON run config")->required();
  cmd_baseline->add_option("--kind", baseline_kind,
                           "reactive_model|full_history|oracle_future|online_q_finetune")
      ->required();
  cmd_baseline->add_option("--seed", seed_override, "Seed override");
  cmd_baseline->add_option("--out", out_dir, "Output directory override");

  CLI::App* cmd_bounds = app.add_subcommand("bounds", "Recompute the bound report for a record");
  cmd_bounds->add_option("--run", record_path, "Run record manifest JSON")->required();
  cmd_bounds->add_option("--out", out_dir, "Output directory");

  CLI::App* cmd_tempo = app.add_subcommand("tempo", "Emit the tempo plan for a config");
  cmd_tempo->add_option("--config", config_path, "JSON run config")->required();
  cmd_tempo->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      prost::RunConfig config;
      try {
        config = load_config(config_path, seed_override, out_dir);
      } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfigError;
      }
      const prost::RunRecord record = prost::run_prost_t(config);
      export_all({record}, config.out_dir);
      std::cout << "run complete: K=" << record.plan.times.size()
                << " cumulative_regret=" << prost::fmt_double(record.cumulative_regret)
                << " mean_last10_reward=" << prost::fmt_double(record.mean_last10_reward)
                << "\n";
      return kExitOk;
    }
    if (cmd_sweep->parsed()) {
      prost::RunConfig config;
      prost::SweepGrid grid;
      try {
        config = load_config(config_path, seed_override, out_dir);
        grid = load_grid(grid_path);
      } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfigError;
      }
      const std::vector<prost::RunRecord> records = prost::sweep(config, grid);
      export_all(records, config.out_dir);
      std::size_t failures = 0;
      for (const prost::RunRecord& record : records) {
        if (record.failed()) {
          ++failures;
          std::cerr << "cell " << record.config.name << " failed: " << record.error << "\n";
        }
      }
      std::cout << "sweep complete: " << records.size() - failures << "/" << records.size()
                << " cells succeeded\n";
      return failures == 0 ? kExitOk : kExitPartialSweep;
    }
    if (cmd_baseline->parsed()) {
      prost::RunConfig config;
      prost::AgentKind kind;
      try {
        config = load_config(config_path, seed_override, out_dir);
        kind = prost::agent_kind_from_string(baseline_kind);
      } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfigError;
      }
      config.name = config.name + "_" + baseline_kind;
      const prost::RunRecord record = prost::run_baseline(config, kind);
      export_all({record}, config.out_dir);
      std::cout << "baseline " << baseline_kind
                << " complete: cumulative_regret=" << prost::fmt_double(record.cumulative_regret)
                << " mean_last10_reward=" << prost::fmt_double(record.mean_last10_reward)
                << "\n";
      return kExitOk;
    }
    if (cmd_bounds->parsed()) {
      prost::RunRecord record;
      try {
        record = prost::run_record_from_json(slurp(record_path));
      } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfigError;
      }
      const prost::BoundReport report = prost::bounds_for_record(record);
      const std::string text = prost::bound_report_to_json(report);
      if (out_dir.empty()) {
        std::cout << text << "\n";
      } else {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(std::filesystem::path(out_dir) /
                          (record.config.name + "_bounds.json"));
        out << text;
        std::cout << "bound report written\n";
      }
      return kExitOk;
    }
    if (cmd_tempo->parsed()) {
      prost::RunConfig config;
      try {
        config = load_config(config_path, seed_override, out_dir);
      } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfigError;
      }
      const prost::TempoPlan plan = prost::plan_tempo(config);
      const std::string text = prost::tempo_plan_to_json(plan);
      if (out_dir.empty()) {
        std::cout << text << "\n";
      } else {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(std::filesystem::path(out_dir) / "tempo_plan.json");
        out << text;
        // Budgets behind the plan, per the documented CSV schema.
        const prost::EnvDefinition env = config.build_env();
        const prost::BudgetProfile profile =
            prost::estimate_budget_profile(env, {1.0, 2.0, 3.0, 4.0, 5.0}, config.episodes, 1.0);
        std::ofstream budgets(std::filesystem::path(out_dir) / "budgets.csv");
        budgets << "delta_pi,b_r,b_p,scalar_budget\n";
        for (std::size_t i = 0; i < profile.b_r_samples.size(); ++i) {
          budgets << prost::fmt_double(profile.b_r_samples[i].first) << ","
                  << prost::fmt_double(profile.b_r_samples[i].second) << ","
                  << prost::fmt_double(profile.b_p_samples[i].second) << ","
                  << prost::fmt_double(profile.scalar) << "\n";
        }
        std::cout << "tempo plan written: delta_pi_star=" << plan.delta_pi_star << "\n";
      }
      return kExitOk;
    }
  } catch (const std::exception& ex) {
    std::cerr << "run error: " << ex.what() << "\n";
    return kExitRunError;
  }
  return kExitOk;
}
