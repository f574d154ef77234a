#pragma once

#include <cstdint>
#include <vector>

#include "tilelab/ergodic.hpp"

namespace tilelab {

struct DeviationParams {
  Region base;  // unit region B; measurements run over T * B
  double t_min = 4.0;
  double t_max = 1024.0;
  int windows = 6;       // envelope windows over the log-T range
  int min_points = 4;    // usable window maxima required for the slope fit
  bool subsequence = false;
  int sub_count = 8;     // recurrence entries attempted
  int lyapunov_n = 2000;
  int lyapunov_samples = 4;
  int filtration_n = 60;
};

struct DeviationPoint {
  double T = 0.0;
  double value = 0.0;  // ergodic integral over T * B (+ tau on the subsequence)
  std::int64_t anchors = 0;
  int top_level = 0;
  std::vector<std::int64_t> level_totals;
};

struct DeviationReport {
  std::vector<DeviationPoint> points;
  double slope = 0.0;  // least squares over the envelope window maxima
  int envelope_points = 0;

  // Cocycle-side prediction: filtration coefficients of the observable, the
  // exponent attached to each filtration column (QR values; -inf once the
  // direction dies), and the predicted growth exponent d * lambda_j / lambda_1
  // for the leading active block. Observables active only below the expanding
  // threshold fall back to the boundary exponent d - 1.
  std::vector<double> alpha;
  std::vector<double> exponents;
  double lambda1 = 0.0;
  int leading_index = -1;
  bool boundary_case = false;
  double predicted = 0.0;

  std::vector<DeviationPoint> sub_points;  // recurrence subsequence
  std::vector<int> sub_levels;
  std::vector<Vec> sub_anchors;  // tau_k, the recurrent node anchors
  double sub_slope = 0.0;

  int depth = 0;
  std::uint64_t seed = 0;
};

DeviationReport deviation_series(const TypeHFamily& fam, const SequenceLaw& law,
                                 std::uint64_t seed, const PathSpec& path, const Observable& beta,
                                 const DeviationParams& params,
                                 const CollaredSystem* sys = nullptr);

// Monte Carlo estimate of the boundary-path mass per level under the uniform
// path measure. Bernoulli laws draw a fresh word per sample, so the estimate
// is annealed over the law. `rate` is the fitted geometric ratio of the
// per-level masses; partial sums converge exactly when it stays below 1.
struct BoundaryReport {
  int kmax = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> mass;        // mass[l - 1] = estimate for level l
  std::vector<std::int64_t> hits;
  double rate = 0.0;
  double partial_sum = 0.0;
  int fit_points = 0;
};

BoundaryReport boundary_measure_decay(const TypeHFamily& fam, const SequenceLaw& law,
                                      std::uint64_t seed, int kmax, int samples);

// Least squares slope of y against x; ignores nothing, caller filters.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tilelab
