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

#ifndef IMTHRESH_CALIBRATION_HPP_
#define IMTHRESH_CALIBRATION_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imthresh/embeddings.hpp"

namespace imthresh {

// Same-concept and different-concept similarity values used to fit a
// similarity cutoff. Same-concept values are the positives.
struct PairSimilaritySample {
  std::vector<double> same_pairs;
  std::vector<double> diff_pairs;
};

enum class ThresholdMethod { kF1Max, kMidpoint };

std::string_view to_string(ThresholdMethod method);
ThresholdMethod parse_threshold_method(std::string_view text);

struct ClassifierStats {
  double tpr = 0.0;
  double fpr = 0.0;
  double f1 = 0.0;
};

// A similarity cutoff together with the statistics it achieves on the sample
// it was fitted on.
struct CalibratedThreshold {
  double value = 0.0;
  ThresholdMethod method = ThresholdMethod::kF1Max;
  double tpr = 0.0;
  double fpr = 0.0;
  double f1 = 0.0;
  std::size_t n_same = 0;
  std::size_t n_diff = 0;
};

// Per concept, the mean similarity over unordered pairs of its own
// references; per ordered pair of distinct concepts (a, b), the mean
// similarity over all cross pairs. Concept index order throughout.
PairSimilaritySample collect_pair_similarities(
    std::span<const EmbeddingMatrix> reference_sets);

// Classifier "same iff similarity >= threshold" evaluated on the sample.
// f1 = 2TP / (2TP + FP + FN), 0 when nothing is predicted positive.
ClassifierStats classifier_stats(const PairSimilaritySample& sample,
                                 double threshold);

// Cutoff maximizing F1 over midpoints of consecutive distinct observed
// values plus the two "everything" / "nothing" sentinels. Ties go to the lower
// cutoff. The "everything positive" sentinel is reported as the smallest
// observed value, which induces the same classification.
CalibratedThreshold f1_max_threshold(const PairSimilaritySample& sample);

// (min(same) + max(diff)) / 2 on a separable sample; DomainError otherwise.
CalibratedThreshold midpoint_threshold(const PairSimilaritySample& sample);

CalibratedThreshold fit_threshold(const PairSimilaritySample& sample,
                                  ThresholdMethod method);

}  // namespace imthresh

#endif  // IMTHRESH_CALIBRATION_HPP_
