#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "prost/csv.hpp"
#include "prost/harness.hpp"

namespace prost {

namespace {

void apply_numeric_override(RunConfig& config, const std::string& key, double value) {
  if (key == "delta_pi") {
    config.delta_pi = static_cast<std::size_t>(value);
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(value);
  } else if (key == "sine_speed") {
    config.sine_speed = static_cast<int>(value);
  } else if (key == "window") {
    config.window = static_cast<std::size_t>(value);
  } else if (key == "scalar_window") {
    config.scalar.window = static_cast<std::size_t>(value);
  } else if (key == "episodes") {
    config.episodes = static_cast<std::size_t>(value);
  } else if (key == "drift_noise_bound") {
    config.drift_noise_bound = value;
  } else if (key == "noise_delta") {
    config.noise.delta = value;
  } else if (key == "tau") {
    config.hp.tau = value;
  } else if (key == "eta") {
    config.hp.eta = value;
    config.auto_eta = false;
  } else if (key == "gamma") {
    config.chain.gamma = value;
    config.reacher.gamma = value;
  } else if (key == "lambda") {
    config.hp.lambda = value;
  } else if (key == "beta") {
    config.hp.beta = value;
    config.auto_beta = false;
  } else if (key == "q_learning_step") {
    config.q_learning_step = value;
  } else if (key == "reacher_period_episodes") {
    config.reacher_period_episodes = value;
  } else if (key == "t1") {
    config.t1 = value;
  } else {
    throw std::invalid_argument("sweep: unknown numeric grid key " + key);
  }
}

void apply_text_override(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "forecaster") {
    if (value == "sw_lse") {
      config.forecaster = ForecasterKind::kSwLse;
    } else if (value == "w_lse") {
      config.forecaster = ForecasterKind::kWLse;
    } else if (value == "scalar_structural") {
      config.forecaster = ForecasterKind::kScalarStructural;
    } else {
      throw std::invalid_argument("sweep: unknown forecaster " + value);
    }
  } else if (key == "env_kind") {
    config.env_kind = value;
  } else if (key == "scalar_kind") {
    config.scalar.kind = value == "ar_ls" ? ScalarForecaster::Kind::kArLs
                                          : ScalarForecaster::Kind::kSimpleAverage;
  } else {
    throw std::invalid_argument("sweep: unknown text grid key " + key);
  }
}

std::string trim_zeros(double v) { return fmt_double(v); }

}  // namespace

std::vector<RunRecord> sweep(const RunConfig& base, const SweepGrid& grid, AgentKind kind,
                             bool parallel) {
  struct Axis {
    std::string key;
    bool numeric;
    std::vector<double> values;
    std::vector<std::string> texts;
    std::size_t size() const { return numeric ? values.size() : texts.size(); }
  };
  std::vector<Axis> axes;
  for (const auto& [key, values] : grid.numeric) {
    if (values.empty()) throw std::invalid_argument("sweep: empty grid axis " + key);
    axes.push_back({key, true, values, {}});
  }
  for (const auto& [key, values] : grid.text) {
    if (values.empty()) throw std::invalid_argument("sweep: empty grid axis " + key);
    axes.push_back({key, false, {}, values});
  }
  if (axes.empty()) throw std::invalid_argument("sweep: empty grid");
  const bool grid_has_seed = grid.numeric.count("seed") > 0;

  std::size_t cells = 1;
  for (const Axis& axis : axes) cells *= axis.size();

  std::vector<RunConfig> configs;
  configs.reserve(cells);
  for (std::size_t index = 0; index < cells; ++index) {
    RunConfig config = base;
    std::size_t rem = index;
    std::ostringstream name;
    for (const Axis& axis : axes) {
      const std::size_t pos = rem % axis.size();
      rem /= axis.size();
      if (!name.str().empty()) name << ",";
      if (axis.numeric) {
        apply_numeric_override(config, axis.key, axis.values[pos]);
        name << axis.key << "=" << trim_zeros(axis.values[pos]);
      } else {
        apply_text_override(config, axis.key, axis.texts[pos]);
        name << axis.key << "=" << axis.texts[pos];
      }
    }
    if (!grid_has_seed) config.seed = base.seed ^ static_cast<std::uint64_t>(index);
    config.name = name.str();
    configs.push_back(std::move(config));
  }

  std::vector<RunRecord> records(cells);
  auto run_cell = [&](std::size_t index) {
    try {
      records[index] = run_baseline(configs[index], kind);
    } catch (const std::exception& ex) {
      records[index].config = configs[index];
      records[index].agent = kind;
      records[index].error = ex.what();
    }
    records[index].config.name = configs[index].name;
  };

  if (parallel && cells > 1) {
    const std::size_t workers =
        std::min<std::size_t>(cells, std::max(1u, std::thread::hardware_concurrency()));
    std::size_t next = 0;
    while (next < cells) {
      std::vector<std::future<void>> batch;
      for (std::size_t i = 0; i < workers && next < cells; ++i, ++next) {
        batch.push_back(std::async(std::launch::async, run_cell, next));
      }
      for (auto& f : batch) f.get();
    }
  } else {
    for (std::size_t index = 0; index < cells; ++index) run_cell(index);
  }
  return records;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export: cannot write " + path.string());
  out << content;
}

std::string ledger_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "k,t_k,v_star,v_pi,gap,cum_regret,iota_kh_sum,iota_bar_inf\n";
  for (const EpisodeRow& row : record.rows) {
    out << row.k << "," << fmt_double(row.t) << "," << fmt_double(row.v_star) << ","
        << fmt_double(row.v_pi) << "," << fmt_double(row.gap) << ","
        << fmt_double(row.cum_regret) << "," << fmt_double(row.iota_kh_sum) << ","
        << fmt_double(row.iota_bar_inf) << "\n";
  }
  return out.str();
}

std::string forecast_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "k,w,max_reward_error,max_p_row_l1_error,mean_bonus\n";
  for (const EpisodeRow& row : record.rows) {
    out << row.k << "," << record.config.window << "," << fmt_double(row.max_reward_error) << ","
        << fmt_double(row.max_p_row_l1_error) << "," << fmt_double(row.mean_bonus) << "\n";
  }
  return out.str();
}

std::string convergence_csv(const std::vector<double>& gaps, const std::vector<double>& kls) {
  std::ostringstream out;
  out << "g,q_gap_sup,policy_kl_to_final\n";
  for (std::size_t g = 0; g < gaps.size(); ++g) {
    out << g << "," << fmt_double(gaps[g]) << ","
        << fmt_double(g < kls.size() ? kls[g] : 0.0) << "\n";
  }
  return out.str();
}

std::string strip_seed_token(const std::string& name) {
  std::string out;
  std::istringstream in(name);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token.rfind("seed=", 0) == 0) continue;
    if (!out.empty()) out += ",";
    out += token;
  }
  return out.empty() ? "all" : out;
}

}  // namespace

void export_records(const std::vector<RunRecord>& records, ExportFormat format,
                    const std::string& out_dir) {
  if (records.empty()) throw std::invalid_argument("export: no records");
  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("export: cannot create " + dir.string());

  if (format == ExportFormat::kCsv) {
    for (const RunRecord& record : records) {
      if (record.failed()) continue;
      write_file(dir / (record.config.name + "_ledger.csv"), ledger_csv(record));
      write_file(dir / (record.config.name + "_forecast.csv"), forecast_csv(record));
      for (std::size_t i = 0; i < record.q_gap_traces.size(); ++i) {
        write_file(dir / (record.config.name + "_convergence_k" + std::to_string(i + 1) + ".csv"),
                   convergence_csv(record.q_gap_traces[i], record.kl_traces[i]));
      }
    }
    return;
  }
  if (format == ExportFormat::kJson) {
    for (const RunRecord& record : records) {
      write_file(dir / (record.config.name + "_manifest.json"), run_record_to_json(record));
    }
    return;
  }

  // plotdata: long format with mean and 95% band across seed groups.
  std::ostringstream out;
  out << "series,x,y,lo,hi\n";
  std::map<std::string, std::vector<const RunRecord*>> groups;
  for (const RunRecord& record : records) {
    if (record.failed()) continue;
    const std::string base = strip_seed_token(record.config.name);
    groups[base].push_back(&record);
    for (const EpisodeRow& row : record.rows) {
      out << record.config.name << "/reward," << row.k << "," << fmt_double(row.realized_return)
          << "," << fmt_double(row.realized_return) << "," << fmt_double(row.realized_return)
          << "\n";
      out << record.config.name << "/cum_regret," << row.k << "," << fmt_double(row.cum_regret)
          << "," << fmt_double(row.cum_regret) << "," << fmt_double(row.cum_regret) << "\n";
    }
  }
  for (const auto& [base, group] : groups) {
    if (group.size() < 2) continue;
    const std::size_t episodes = group.front()->rows.size();
    for (std::size_t i = 0; i < episodes; ++i) {
      double mean = 0.0;
      std::size_t n = 0;
      for (const RunRecord* record : group) {
        if (i < record->rows.size()) {
          mean += record->rows[i].realized_return;
          ++n;
        }
      }
      if (n == 0) continue;
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (const RunRecord* record : group) {
        if (i < record->rows.size()) {
          const double d = record->rows[i].realized_return - mean;
          var += d * d;
        }
      }
      var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
      const double half = 1.96 * std::sqrt(var / static_cast<double>(n));
      out << base << "/reward_mean," << (i + 1) << "," << fmt_double(mean) << ","
          << fmt_double(mean - half) << "," << fmt_double(mean + half) << "\n";
    }
  }
  write_file(dir / "plotdata.csv", out.str());
}

}  // namespace prost
