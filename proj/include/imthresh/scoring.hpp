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

#ifndef IMTHRESH_SCORING_HPP_
#define IMTHRESH_SCORING_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "imthresh/embeddings.hpp"

namespace imthresh {

inline constexpr std::size_t kDefaultTopK = 10;

struct PromptScore {
  std::string prompt_id;
  double score = 0.0;

  friend bool operator==(const PromptScore&, const PromptScore&) = default;
};

// Imitation scores of one concept across prompts. `variance` is the
// population variance.
struct ImitationRecord {
  std::string concept_id;
  std::vector<PromptScore> per_prompt_scores;
  double mean_score = 0.0;
  double variance = 0.0;
  double frequency = 0.0;

  friend bool operator==(const ImitationRecord&,
                         const ImitationRecord&) = default;
};

// Indices of the `k` training rows with the highest mean similarity to the
// generated rows, best first; ties go to the lower index. Returns every row
// when there are fewer than k.
std::vector<std::size_t> topk_training_selection(const EmbeddingMatrix& generated,
                                                 const EmbeddingMatrix& training,
                                                 std::size_t k = kDefaultTopK);

// Mean cosine similarity over all (generated, selected training) pairs.
double imitation_score(const EmbeddingMatrix& generated,
                       const EmbeddingMatrix& training,
                       std::size_t k = kDefaultTopK);

ImitationRecord aggregate_prompts(std::vector<PromptScore> scores,
                                  double frequency,
                                  std::string concept_id = {});

// Per-prompt CSV: concept_id,frequency,prompt_id,score
std::string prompt_scores_csv(std::span<const ImitationRecord> records);
// Aggregated CSV: concept_id,frequency,mean,variance
std::string aggregated_scores_csv(std::span<const ImitationRecord> records);

// Inverse of aggregated_scores_csv; per-prompt scores are left empty.
std::vector<ImitationRecord> parse_aggregated_scores_csv(std::string_view text);
// Inverse of prompt_scores_csv; rows are grouped by concept in file order and
// re-aggregated.
std::vector<ImitationRecord> parse_prompt_scores_csv(std::string_view text);

}  // namespace imthresh

#endif  // IMTHRESH_SCORING_HPP_
