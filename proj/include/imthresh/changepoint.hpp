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

#ifndef IMTHRESH_CHANGEPOINT_HPP_
#define IMTHRESH_CHANGEPOINT_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imthresh {

struct SeriesPoint {
  std::string concept_id;
  double frequency = 0.0;
  double score = 0.0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

// Imitation scores ordered by ascending concept frequency (ties by
// concept_id). Zero-frequency concepts are kept.
class ScoreSeries {
 public:
  ScoreSeries() = default;
  // Sorts the points. Throws FormatError on non-finite values or negative
  // frequencies.
  explicit ScoreSeries(std::vector<SeriesPoint> points);

  std::size_t size() const noexcept { return points_.size(); }
  const SeriesPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<SeriesPoint>& points() const noexcept { return points_; }
  std::vector<double> scores() const;
  std::vector<double> frequencies() const;

  friend bool operator==(const ScoreSeries&, const ScoreSeries&) = default;

 private:
  std::vector<SeriesPoint> points_;
};

// Segmentation of a series. change_indices holds the first position of every
// segment after the first, strictly increasing, each in (0, n).
struct ChangePointResult {
  std::size_t series_length = 0;
  std::vector<std::size_t> change_indices;
  std::vector<double> segment_means;
  std::vector<double> change_frequencies;
  std::optional<double> threshold_frequency;
  double penalty = 0.0;
  // Sum of L2 segment costs plus penalty per change point.
  double objective = 0.0;
  std::string cost_model = "l2_meanshift";
};

// Penalized L2 mean-shift objective of the segmentation given by
// `change_indices`, evaluated directly (two-pass means).
double segmentation_objective(std::span<const double> y,
                              std::span<const std::size_t> change_indices,
                              double penalty);

// Optimal penalized segmentation with PELT pruning (pruning constant 0).
ChangePointResult pelt_detect(const ScoreSeries& series, double penalty);
std::vector<std::size_t> pelt_change_points(std::span<const double> y,
                                            double penalty);

// Exhaustive search over all 2^(n-1) segmentations. n <= 20.
std::vector<std::size_t> exhaustive_change_points(std::span<const double> y,
                                                  double penalty);
// O(n^2) optimal-partitioning dynamic program with running segment
// statistics. n <= 5000.
std::vector<std::size_t> optimal_partition_change_points(
    std::span<const double> y, double penalty);

// Verification oracle: exhaustive enumeration for n <= 20, otherwise the
// O(n^2) dynamic program up to n = 5000.
ChangePointResult brute_force_segment(const ScoreSeries& series, double penalty);

// Frequency at the first change index, or nullopt when there is none.
std::optional<double> imitation_threshold(const ScoreSeries& series,
                                          const ChangePointResult& result);

// 2 * sigma^2 * ln(n), sigma estimated from the first differences by
// MAD / (0.6745 * sqrt(2)). Falls back to the mean absolute deviation when the
// MAD is zero, and floors the result at 1e-12. Requires n >= 4.
double default_penalty(const ScoreSeries& series);
double default_penalty(std::span<const double> y);

inline constexpr double kPenaltyFloor = 1e-12;

// Builds a full result (means, frequencies, threshold) from change indices.
ChangePointResult make_result(const ScoreSeries& series,
                              std::vector<std::size_t> change_indices,
                              double penalty);

}  // namespace imthresh

#endif  // IMTHRESH_CHANGEPOINT_HPP_
