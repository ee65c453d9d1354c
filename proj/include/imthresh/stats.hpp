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

#ifndef IMTHRESH_STATS_HPP_
#define IMTHRESH_STATS_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "imthresh/changepoint.hpp"
#include "imthresh/embeddings.hpp"
#include "imthresh/scoring.hpp"

namespace imthresh {

// Least-squares non-decreasing fit (pool adjacent violators, unit weights).
std::vector<double> isotonic_fit(std::span<const double> y);
std::vector<double> isotonic_fit(const ScoreSeries& series);

// Mid-ranks (1-based), ties share the average of their positions.
std::vector<double> average_ranks(std::span<const double> x);

// Spearman rank correlation: Pearson correlation of mid-ranks. Throws
// UndefinedStatisticError when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct NormalizedRatings {
  std::map<std::string, std::vector<double>> ratings;
  // Participants whose ratings were constant (mapped to zeros).
  std::vector<std::string> constant_raters;
};

// Per-participant z-scores (population standard deviation).
NormalizedRatings normalize_ratings(
    const std::map<std::string, std::vector<double>>& per_participant);

// Human rating >= 3 counts as "imitated".
inline constexpr double kHumanPositiveRating = 3.0;

struct AgreementInput {
  std::vector<std::uint8_t> human_binary;
  std::vector<std::uint8_t> predicted_binary;
};

enum class AgreementMode {
  kMatch,       // fraction of positions where both vectors agree
  kDotProduct,  // fraction of positions where both are 1
};

AgreementInput make_agreement_input(std::span<const double> human_ratings,
                                    std::span<const double> frequencies,
                                    double imitation_threshold);

double threshold_agreement(const AgreementInput& input,
                           AgreementMode mode = AgreementMode::kMatch);

struct InvarianceResult {
  double value = 0.0;
  std::size_t pair_count = 0;
  bool empty = true;
  // Standard error of the pair differences (0 with fewer than 2 pairs).
  double standard_error = 0.0;
};

// Mean of (score_j - score_i) over frequency-ordered pairs i < j whose
// frequencies differ by less than `delta`.
InvarianceResult invariance_check(std::span<const ImitationRecord> records,
                                  double delta = 10.0);

inline constexpr std::uint64_t kMissRateSampleSize = 100000;

struct MissRate {
  double miss_fraction = 0.0;
  double extrapolated_missed = 0.0;
};

// Images showing a concept without naming it in the caption, as a fraction of
// a random sample, scaled to the corpus.
MissRate caption_miss_rate(std::uint64_t detected_total,
                           std::uint64_t detected_with_mention,
                           double corpus_size,
                           std::uint64_t sample_size = kMissRateSampleSize);

struct GroupMember {
  std::string person_id;
  EmbeddingMatrix faces;
};

struct DemographicGroup {
  std::string group_id;
  std::vector<GroupMember> members;
};

struct GroupRates {
  std::string group_id;
  double fmr = 0.0;
  double tmr = 0.0;
};

// Embedder audit: TMR is the mean within-person pairwise similarity, FMR the
// mean similarity of a person's faces to every other member's faces, each
// averaged over members.
std::vector<GroupRates> fmr_tmr(std::span<const DemographicGroup> groups);

}  // namespace imthresh

#endif  // IMTHRESH_STATS_HPP_
