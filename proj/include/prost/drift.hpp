#pragma once

#include <string>
#include <utility>
#include <vector>

#include "prost/rng.hpp"

namespace prost {

// Scalar non-stationary parameter sequence, clean and noise-corrupted.
// Invariant: |noisy[k] - clean[k]| <= noise_bound for all k.
struct DriftSeries {
  std::vector<double> clean;
  std::vector<double> noisy;
  double noise_bound = 0.0;

  std::size_t length() const { return clean.size(); }
};

// o_k = sin(2*pi*speed*k / 37). The divisor 37 is prime so consecutive
// samples cycle through many distinct phases before repeating.
double sine_drift(int speed, double k);

// Builds the sine series o_k for k = k_begin..k_end inclusive (noisy = clean).
DriftSeries make_sine_series(int speed, int k_begin, int k_end);

// Reads one real per line ('#' comments and blank lines skipped), rescales by
// 1/max|value| so the series lies in [-1, 1]. An all-zero series is left
// unscaled. Throws std::runtime_error naming the offending line on parse
// failure, a missing file, or an empty series.
DriftSeries load_drift_series(const std::string& path);

// noisy[k] = clean[k] + Unif([-b, b]). Rejects b < 0.
DriftSeries corrupt(const DriftSeries& series, double b, Rng& rng);

// Sum of |o_{k+1} - o_k| over the clean series. Requires length >= 2.
double scalar_budget(const DriftSeries& series);

// Least-squares exponent alpha of B(c * delta) <= c^alpha * B(delta), fit on
// log B versus log c and clamped to >= 0. Samples are (c, B(c*delta)) pairs
// with c > 0 and B > 0; at least two samples required.
double fit_drifting_constant(const std::vector<std::pair<double, double>>& samples);

}  // namespace prost
