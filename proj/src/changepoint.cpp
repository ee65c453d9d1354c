// Copyright 2026 The imthresh Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "imthresh/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "imthresh/errors.hpp"

namespace imthresh {
namespace {

constexpr std::size_t kExhaustiveMax = 20;
constexpr std::size_t kDynamicProgramMax = 5000;

void check_detect_args(std::size_t n, double penalty, const char* op) {
  if (n < 2) {
    throw DomainError(std::string(op) + ": series needs at least 2 points, got " +
                      std::to_string(n));
  }
  if (!(penalty > 0.0)) {
    throw DomainError(std::string(op) + ": penalty must be positive");
  }
}

double direct_segment_cost(std::span<const double> seg) {
  double sum = 0.0;
  for (double v : seg) sum += v;
  const double mean = sum / static_cast<double>(seg.size());
  double cost = 0.0;
  for (double v : seg) cost += (v - mean) * (v - mean);
  return cost;
}

std::vector<std::size_t> backtrack(const std::vector<std::size_t>& last,
                                   std::size_t n) {
  std::vector<std::size_t> changes;
  for (std::size_t t = n; last[t] > 0; t = last[t]) changes.push_back(last[t]);
  std::reverse(changes.begin(), changes.end());
  return changes;
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return (lower + upper) / 2.0;
}

}  // namespace

ScoreSeries::ScoreSeries(std::vector<SeriesPoint> points)
    : points_(std::move(points)) {
  for (const auto& p : points_) {
    if (!std::isfinite(p.score) || !std::isfinite(p.frequency)) {
      throw FormatError("score series: non-finite value for concept '" +
                        p.concept_id + "'");
    }
    if (p.frequency < 0.0) {
      throw FormatError("score series: negative frequency for concept '" +
                        p.concept_id + "'");
    }
  }
  std::sort(points_.begin(), points_.end(),
            [](const SeriesPoint& a, const SeriesPoint& b) {
              if (a.frequency != b.frequency) return a.frequency < b.frequency;
              return a.concept_id < b.concept_id;
            });
}

std::vector<double> ScoreSeries::scores() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.score);
  return out;
}

std::vector<double> ScoreSeries::frequencies() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.frequency);
  return out;
}

double segmentation_objective(std::span<const double> y,
                              std::span<const std::size_t> change_indices,
                              double penalty) {
  double total = 0.0;
  std::size_t start = 0;
  for (std::size_t c : change_indices) {
    total += direct_segment_cost(y.subspan(start, c - start)) + penalty;
    start = c;
  }
  return total + direct_segment_cost(y.subspan(start));
}

std::vector<std::size_t> pelt_change_points(std::span<const double> y,
                                            double penalty) {
  const std::size_t n = y.size();
  check_detect_args(n, penalty, "pelt_detect");

  // Centering keeps the prefix-sum cost formula well conditioned.
  double total = 0.0;
  for (double v : y) total += v;
  const double center = total / static_cast<double>(n);
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = y[i] - center;
    s1[i + 1] = s1[i] + c;
    s2[i + 1] = s2[i] + c * c;
  }
  auto cost = [&](std::size_t s, std::size_t t) {
    const double sum = s1[t] - s1[s];
    const double c = (s2[t] - s2[s]) - sum * sum / static_cast<double>(t - s);
    return c > 0.0 ? c : 0.0;
  };
  // Candidates within this slack of the optimum survive pruning, so rounding
  // never discards a start that exact arithmetic would keep.
  const double slack = 1e-9 * (s2[n] + penalty);

  std::vector<double> best(n + 1, 0.0);
  std::vector<std::size_t> last(n + 1, 0);
  best[0] = -penalty;
  std::vector<std::size_t> candidates{0};
  std::vector<double> totals;
  for (std::size_t t = 1; t <= n; ++t) {
    totals.resize(candidates.size());
    double f = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const std::size_t s = candidates[i];
      totals[i] = best[s] + cost(s, t);
      if (totals[i] + penalty < f) {
        f = totals[i] + penalty;
        arg = s;
      }
    }
    best[t] = f;
    last[t] = arg;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (totals[i] <= f + slack) candidates[kept++] = candidates[i];
    }
    candidates.resize(kept);
    candidates.push_back(t);
  }
  return backtrack(last, n);
}

std::vector<std::size_t> exhaustive_change_points(std::span<const double> y,
                                                  double penalty) {
  const std::size_t n = y.size();
  check_detect_args(n, penalty, "brute_force_segment");
  if (n > kExhaustiveMax) {
    throw DomainError("exhaustive segmentation limited to n <= 20, got " +
                      std::to_string(n));
  }
  const std::uint32_t masks = 1u << (n - 1);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_changes;
  std::vector<std::size_t> changes;
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    changes.clear();
    // Bit b set means a new segment starts at position b + 1.
    for (std::size_t b = 0; b + 1 < n; ++b) {
      if (mask & (1u << b)) changes.push_back(b + 1);
    }
    const double obj = segmentation_objective(y, changes, penalty);
    if (obj < best) {
      best = obj;
      best_changes = changes;
    }
  }
  return best_changes;
}

std::vector<std::size_t> optimal_partition_change_points(
    std::span<const double> y, double penalty) {
  const std::size_t n = y.size();
  check_detect_args(n, penalty, "brute_force_segment");
  if (n > kDynamicProgramMax) {
    throw DomainError("optimal partitioning limited to n <= 5000, got " +
                      std::to_string(n));
  }
  std::vector<double> best(n + 1, 0.0);
  std::vector<std::size_t> last(n + 1, 0);
  best[0] = -penalty;
  std::vector<double> seg_cost(n + 1);
  for (std::size_t t = 1; t <= n; ++t) {
    // Welford accumulation of y[s..t) while s walks down from t-1 to 0.
    double mean = 0.0, m2 = 0.0;
    std::size_t len = 0;
    for (std::size_t s = t; s-- > 0;) {
      ++len;
      const double delta = y[s] - mean;
      mean += delta / static_cast<double>(len);
      m2 += delta * (y[s] - mean);
      seg_cost[s] = m2;
    }
    double f = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t s = 0; s < t; ++s) {
      const double v = best[s] + seg_cost[s] + penalty;
      if (v < f) {
        f = v;
        arg = s;
      }
    }
    best[t] = f;
    last[t] = arg;
  }
  return backtrack(last, n);
}

ChangePointResult make_result(const ScoreSeries& series,
                              std::vector<std::size_t> change_indices,
                              double penalty) {
  const auto y = series.scores();
  ChangePointResult r;
  r.series_length = series.size();
  r.penalty = penalty;
  r.objective = segmentation_objective(y, change_indices, penalty);
  std::size_t start = 0;
  auto push_mean = [&](std::size_t end) {
    double sum = 0.0;
    for (std::size_t i = start; i < end; ++i) sum += y[i];
    r.segment_means.push_back(sum / static_cast<double>(end - start));
    start = end;
  };
  for (std::size_t c : change_indices) {
    r.change_frequencies.push_back(series[c].frequency);
    push_mean(c);
  }
  push_mean(y.size());
  r.change_indices = std::move(change_indices);
  if (!r.change_indices.empty()) {
    r.threshold_frequency = series[r.change_indices.front()].frequency;
  }
  return r;
}

ChangePointResult pelt_detect(const ScoreSeries& series, double penalty) {
  return make_result(series, pelt_change_points(series.scores(), penalty),
                     penalty);
}

ChangePointResult brute_force_segment(const ScoreSeries& series,
                                      double penalty) {
  const auto y = series.scores();
  auto changes = y.size() <= kExhaustiveMax
                     ? exhaustive_change_points(y, penalty)
                     : optimal_partition_change_points(y, penalty);
  return make_result(series, std::move(changes), penalty);
}

std::optional<double> imitation_threshold(const ScoreSeries& series,
                                          const ChangePointResult& result) {
  if (result.series_length != series.size()) {
    throw DomainError("imitation_threshold: result was computed on a series of "
                      "length " + std::to_string(result.series_length) +
                      ", got " + std::to_string(series.size()));
  }
  if (result.change_indices.empty()) return std::nullopt;
  const std::size_t first = result.change_indices.front();
  if (first == 0 || first >= series.size()) {
    throw DomainError("imitation_threshold: change index out of range");
  }
  return series[first].frequency;
}

double default_penalty(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n < 4) {
    throw DomainError("default_penalty: series needs at least 4 points, got " +
                      std::to_string(n));
  }
  std::vector<double> diffs(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) diffs[i] = y[i + 1] - y[i];
  const double med = median_of(diffs);
  std::vector<double> dev(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) dev[i] = std::abs(diffs[i] - med);

  // Differences of i.i.d. noise have standard deviation sigma * sqrt(2).
  double sigma = median_of(dev) / (0.6745 * std::numbers::sqrt2);
  if (sigma == 0.0) {
    double sum = 0.0;
    for (double d : dev) sum += d;
    const double mean_abs_dev = sum / static_cast<double>(dev.size());
    sigma = mean_abs_dev * std::sqrt(std::numbers::pi / 2.0) / std::numbers::sqrt2;
  }
  const double penalty = 2.0 * sigma * sigma * std::log(static_cast<double>(n));
  return std::max(penalty, kPenaltyFloor);
}

double default_penalty(const ScoreSeries& series) {
  return default_penalty(series.scores());
}

}  // namespace imthresh
