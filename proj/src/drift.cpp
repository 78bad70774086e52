#include "prost/drift.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace prost {

double sine_drift(int speed, double k) {
  if (speed <= 0) throw std::invalid_argument("sine_drift: speed must be positive");
  return std::sin(2.0 * std::numbers::pi * speed * k / 37.0);
}

DriftSeries make_sine_series(int speed, int k_begin, int k_end) {
  if (k_end < k_begin) throw std::invalid_argument("make_sine_series: empty range");
  DriftSeries out;
  out.clean.reserve(static_cast<std::size_t>(k_end - k_begin + 1));
  for (int k = k_begin; k <= k_end; ++k) out.clean.push_back(sine_drift(speed, k));
  out.noisy = out.clean;
  return out;
}

DriftSeries load_drift_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_drift_series: cannot open " + path);
  DriftSeries out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    double value = 0.0;
    std::string trailing;
    if (!(ss >> value) || (ss >> trailing)) {
      throw std::runtime_error("load_drift_series: unparsable record at line " +
                               std::to_string(line_no) + " of " + path);
    }
    out.clean.push_back(value);
  }
  if (out.clean.empty()) throw std::runtime_error("load_drift_series: empty series in " + path);
  double max_abs = 0.0;
  for (double v : out.clean) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs > 0.0) {
    for (double& v : out.clean) v /= max_abs;
  }
  out.noisy = out.clean;
  return out;
}

DriftSeries corrupt(const DriftSeries& series, double b, Rng& rng) {
  if (b < 0.0) throw std::invalid_argument("corrupt: noise bound must be >= 0");
  DriftSeries out = series;
  out.noise_bound = b;
  out.noisy.resize(out.clean.size());
  for (std::size_t k = 0; k < out.clean.size(); ++k) {
    out.noisy[k] = out.clean[k] + (b > 0.0 ? rng.uniform(-b, b) : 0.0);
  }
  return out;
}

double scalar_budget(const DriftSeries& series) {
  if (series.length() < 2) throw std::invalid_argument("scalar_budget: need >= 2 values");
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < series.clean.size(); ++k) {
    total += std::abs(series.clean[k + 1] - series.clean[k]);
  }
  return total;
}

double fit_drifting_constant(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("fit_drifting_constant: need >= 2 samples");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [c, budget] : samples) {
    if (!(c > 0.0) || !(budget > 0.0)) {
      throw std::invalid_argument("fit_drifting_constant: samples must be positive");
    }
    const double x = std::log(c);
    const double y = std::log(budget);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(samples.size());
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) {
    throw std::invalid_argument("fit_drifting_constant: degenerate sample spacing");
  }
  const double slope = (n * sxy - sx * sy) / denom;
  return std::max(0.0, slope);
}

}  // namespace prost
