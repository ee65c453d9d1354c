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

#ifndef IMTHRESH_FILTERING_HPP_
#define IMTHRESH_FILTERING_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imthresh/calibration.hpp"
#include "imthresh/embeddings.hpp"

namespace imthresh {

enum class ConceptDomain { kFaces, kArt, kSynthetic };

std::string_view to_string(ConceptDomain domain);
ConceptDomain parse_domain(std::string_view text);

// Per-concept counts. Invariant: positive <= retrieved <= caption.
struct ConceptRecord {
  std::string concept_id;
  std::string name;
  ConceptDomain domain = ConceptDomain::kFaces;
  std::uint64_t caption_count = 0;
  std::uint64_t retrieved_count = 0;
  std::uint64_t positive_count = 0;
  double estimated_frequency = 0.0;
  std::vector<std::string> aliases;

  friend bool operator==(const ConceptRecord&, const ConceptRecord&) = default;
};

enum class FilterReason { kKept, kBelowThreshold, kNonArt };

std::string_view to_string(FilterReason reason);
FilterReason parse_filter_reason(std::string_view text);

struct CandidateDecision {
  std::string id;
  double max_sim = 0.0;  // stage-2 (reference) similarity
  FilterReason reason = FilterReason::kKept;

  bool kept() const { return reason == FilterReason::kKept; }
  friend bool operator==(const CandidateDecision&,
                         const CandidateDecision&) = default;
};

// Decisions in candidate order; kept and rejected ids partition the
// candidates.
struct FilterResult {
  std::vector<CandidateDecision> decisions;

  std::vector<std::string> kept_ids() const;
  std::vector<std::string> rejected_ids() const;
  std::vector<std::size_t> kept_rows() const;
  std::size_t kept_count() const;
};

// Keep a candidate iff its max similarity to any reference is >= the cutoff.
FilterResult filter_candidates(const EmbeddingMatrix& candidates,
                               const EmbeddingMatrix& refs,
                               const CalibratedThreshold& threshold);

// Art filtering, stage 1 in the same space as the candidates: artness is the
// cosine similarity to `artness_axis`.
FilterResult two_stage_art_filter(const EmbeddingMatrix& candidates,
                                  std::span<const float> artness_axis,
                                  double artness_threshold,
                                  const EmbeddingMatrix& style_refs,
                                  const CalibratedThreshold& style_threshold);

// Art filtering with stage-1 scores computed elsewhere (typically a different
// embedding model), keyed by candidate id. A missing score is a FormatError.
FilterResult two_stage_art_filter(
    const EmbeddingMatrix& candidates,
    const std::map<std::string, double, std::less<>>& artness_scores,
    double artness_threshold, const EmbeddingMatrix& style_refs,
    const CalibratedThreshold& style_threshold);

inline constexpr std::uint64_t kDefaultSampleCap = 100000;

struct FrequencyEstimate {
  double value = 0.0;
  bool extrapolated = false;
  // Sampled regime with nothing retrieved; value forced to 0.
  bool no_retrieved_warning = false;
};

// Above `sample_cap` caption mentions the positive ratio over the retrieved
// sample is scaled up to the caption count; at or below it the positive
// count is used as is.
FrequencyEstimate estimate_frequency(std::uint64_t caption_count,
                                     std::uint64_t retrieved_count,
                                     std::uint64_t positive_count,
                                     std::uint64_t sample_cap = kDefaultSampleCap);

// Sums all counts into one record named after the first; `aliases` gains the
// ids (and own aliases) of every other merged record, in input order.
ConceptRecord merge_aliases(std::span<const ConceptRecord> records);

// CSV: concept_id,name,domain,caption_count,retrieved_count,positive_count,
//      estimated_frequency,aliases   (aliases ';'-separated)
std::string concept_table_csv(std::span<const ConceptRecord> records);
std::vector<ConceptRecord> parse_concept_table_csv(std::string_view text);

}  // namespace imthresh

#endif  // IMTHRESH_FILTERING_HPP_
