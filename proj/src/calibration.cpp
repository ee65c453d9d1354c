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

#include "imthresh/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "imthresh/errors.hpp"

namespace imthresh {
namespace {

void require_nonempty(const PairSimilaritySample& sample, const char* op) {
  if (sample.same_pairs.empty() || sample.diff_pairs.empty()) {
    throw DomainError(std::string(op) +
                      ": both same-pair and diff-pair lists must be nonempty");
  }
}

double mean_within(const EmbeddingMatrix& m) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < m.count(); ++i) {
    for (std::size_t j = i + 1; j < m.count(); ++j) {
      sum += cosine_similarity(m.row(i), m.row(j));
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double mean_across(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.count(); ++i) {
    for (std::size_t j = 0; j < b.count(); ++j) {
      sum += cosine_similarity(a.row(i), b.row(j));
    }
  }
  return sum / static_cast<double>(a.count() * b.count());
}

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0) return 0.0;
  return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace

std::string_view to_string(ThresholdMethod method) {
  return method == ThresholdMethod::kF1Max ? "f1max" : "midpoint";
}

ThresholdMethod parse_threshold_method(std::string_view text) {
  if (text == "f1max") return ThresholdMethod::kF1Max;
  if (text == "midpoint") return ThresholdMethod::kMidpoint;
  throw ManifestError("unknown threshold method '" + std::string(text) +
                      "' (expected f1max or midpoint)");
}

PairSimilaritySample collect_pair_similarities(
    std::span<const EmbeddingMatrix> reference_sets) {
  if (reference_sets.size() < 2) {
    throw DomainError("collect_pair_similarities: need at least 2 concepts, got " +
                      std::to_string(reference_sets.size()));
  }
  for (std::size_t c = 0; c < reference_sets.size(); ++c) {
    if (reference_sets[c].count() < 2) {
      throw DomainError("collect_pair_similarities: concept " +
                        std::to_string(c) +
                        " needs at least 2 reference rows");
    }
    if (reference_sets[c].dim() != reference_sets[0].dim()) {
      throw FormatError("collect_pair_similarities: dimension mismatch");
    }
  }
  PairSimilaritySample sample;
  for (const auto& refs : reference_sets) {
    sample.same_pairs.push_back(mean_within(refs));
  }
  for (std::size_t a = 0; a < reference_sets.size(); ++a) {
    for (std::size_t b = 0; b < reference_sets.size(); ++b) {
      if (a == b) continue;
      sample.diff_pairs.push_back(
          mean_across(reference_sets[a], reference_sets[b]));
    }
  }
  return sample;
}

ClassifierStats classifier_stats(const PairSimilaritySample& sample,
                                 double threshold) {
  require_nonempty(sample, "classifier_stats");
  const auto tp = static_cast<std::size_t>(
      std::count_if(sample.same_pairs.begin(), sample.same_pairs.end(),
                    [&](double v) { return v >= threshold; }));
  const auto fp = static_cast<std::size_t>(
      std::count_if(sample.diff_pairs.begin(), sample.diff_pairs.end(),
                    [&](double v) { return v >= threshold; }));
  const std::size_t fn = sample.same_pairs.size() - tp;
  return {static_cast<double>(tp) / sample.same_pairs.size(),
          static_cast<double>(fp) / sample.diff_pairs.size(),
          f1_from_counts(tp, fp, fn)};
}

CalibratedThreshold f1_max_threshold(const PairSimilaritySample& sample) {
  require_nonempty(sample, "f1_max_threshold");
  std::vector<double> same = sample.same_pairs;
  std::vector<double> diff = sample.diff_pairs;
  std::sort(same.begin(), same.end());
  std::sort(diff.begin(), diff.end());

  std::vector<double> values;
  values.reserve(same.size() + diff.size());
  std::merge(same.begin(), same.end(), diff.begin(), diff.end(),
             std::back_inserter(values));
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // Sweep cutoffs from low to high. A cutoff just above values[i] classifies
  // everything <= values[i] as negative.
  std::size_t same_below = 0;  // same values < current cutoff
  std::size_t diff_below = 0;
  auto counts_at = [&](double cutoff) {
    while (same_below < same.size() && same[same_below] < cutoff) ++same_below;
    while (diff_below < diff.size() && diff[diff_below] < cutoff) ++diff_below;
    const std::size_t tp = same.size() - same_below;
    const std::size_t fp = diff.size() - diff_below;
    return f1_from_counts(tp, fp, same_below);
  };

  double best_cutoff = values.front();
  double best_f1 = counts_at(values.front());
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double cutoff = (values[i] + values[i + 1]) / 2.0;
    const double f1 = counts_at(cutoff);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_cutoff = cutoff;
    }
  }
  // The "nothing positive" sentinel scores F1 = 0 and never beats the
  // "everything positive" candidate, whose F1 is > 0 with nonempty positives.

  const auto stats = classifier_stats(sample, best_cutoff);
  return {best_cutoff, ThresholdMethod::kF1Max, stats.tpr, stats.fpr,
          stats.f1,    sample.same_pairs.size(), sample.diff_pairs.size()};
}

CalibratedThreshold midpoint_threshold(const PairSimilaritySample& sample) {
  require_nonempty(sample, "midpoint_threshold");
  const double min_same =
      *std::min_element(sample.same_pairs.begin(), sample.same_pairs.end());
  const double max_diff =
      *std::max_element(sample.diff_pairs.begin(), sample.diff_pairs.end());
  if (!(min_same > max_diff)) {
    throw DomainError(
        "midpoint_threshold: sample is not separable (min same-pair " +
        std::to_string(min_same) + " <= max diff-pair " +
        std::to_string(max_diff) + "); use the f1max method instead");
  }
  const double value = (min_same + max_diff) / 2.0;
  const auto stats = classifier_stats(sample, value);
  return {value,    ThresholdMethod::kMidpoint, stats.tpr,
          stats.fpr, stats.f1,                  sample.same_pairs.size(),
          sample.diff_pairs.size()};
}

CalibratedThreshold fit_threshold(const PairSimilaritySample& sample,
                                  ThresholdMethod method) {
  return method == ThresholdMethod::kF1Max ? f1_max_threshold(sample)
                                           : midpoint_threshold(sample);
}

}  // namespace imthresh
