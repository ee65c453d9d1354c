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

#include "imthresh/scoring.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "imthresh/errors.hpp"
#include "imthresh/text_format.hpp"

namespace imthresh {
namespace {

const std::vector<std::string> kPromptHeader = {"concept_id", "frequency",
                                                "prompt_id", "score"};
const std::vector<std::string> kAggregateHeader = {"concept_id", "frequency",
                                                   "mean", "variance"};

void check_inputs(const EmbeddingMatrix& generated,
                  const EmbeddingMatrix& training, std::size_t k) {
  if (generated.empty()) throw DomainError("imitation score: no generated rows");
  if (training.empty()) throw DomainError("imitation score: no training rows");
  if (k == 0) throw DomainError("imitation score: k must be >= 1");
  if (generated.dim() != training.dim()) {
    throw FormatError("imitation score: generated dim " +
                      std::to_string(generated.dim()) +
                      " does not match training dim " +
                      std::to_string(training.dim()));
  }
}

// sims is |training| x |generated|.
std::vector<std::size_t> rank_rows(const SimilarityMatrix& sims,
                                   std::size_t k) {
  std::vector<double> means(sims.rows);
  for (std::size_t t = 0; t < sims.rows; ++t) {
    double sum = 0.0;
    for (std::size_t g = 0; g < sims.cols; ++g) sum += sims(t, g);
    means[t] = sum / static_cast<double>(sims.cols);
  }
  std::vector<std::size_t> order(sims.rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return means[a] > means[b];
  });
  order.resize(std::min(k, order.size()));
  return order;
}

}  // namespace

std::vector<std::size_t> topk_training_selection(const EmbeddingMatrix& generated,
                                                 const EmbeddingMatrix& training,
                                                 std::size_t k) {
  check_inputs(generated, training, k);
  return rank_rows(pairwise_similarity(training, generated), k);
}

double imitation_score(const EmbeddingMatrix& generated,
                       const EmbeddingMatrix& training, std::size_t k) {
  check_inputs(generated, training, k);
  const auto sims = pairwise_similarity(training, generated);
  const auto selected = rank_rows(sims, k);
  double sum = 0.0;
  for (std::size_t t : selected) {
    for (std::size_t g = 0; g < sims.cols; ++g) sum += sims(t, g);
  }
  return sum / static_cast<double>(selected.size() * sims.cols);
}

ImitationRecord aggregate_prompts(std::vector<PromptScore> scores,
                                  double frequency, std::string concept_id) {
  if (scores.empty()) throw DomainError("aggregate_prompts: no prompt scores");
  const auto n = static_cast<double>(scores.size());
  double sum = 0.0;
  for (const auto& s : scores) sum += s.score;
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& s : scores) ss += (s.score - mean) * (s.score - mean);
  ImitationRecord rec;
  rec.concept_id = std::move(concept_id);
  rec.per_prompt_scores = std::move(scores);
  rec.mean_score = mean;
  rec.variance = ss / n;
  rec.frequency = frequency;
  return rec;
}

std::string prompt_scores_csv(std::span<const ImitationRecord> records) {
  std::string out = csv_row(kPromptHeader);
  for (const auto& r : records) {
    for (const auto& p : r.per_prompt_scores) {
      out += csv_row({r.concept_id, format_double(r.frequency), p.prompt_id,
                      format_double(p.score)});
    }
  }
  return out;
}

std::string aggregated_scores_csv(std::span<const ImitationRecord> records) {
  std::string out = csv_row(kAggregateHeader);
  for (const auto& r : records) {
    out += csv_row({r.concept_id, format_double(r.frequency),
                    format_double(r.mean_score), format_double(r.variance)});
  }
  return out;
}

std::vector<ImitationRecord> parse_aggregated_scores_csv(std::string_view text) {
  std::vector<ImitationRecord> out;
  for (const auto& row : parse_csv_table(text, kAggregateHeader)) {
    ImitationRecord r;
    r.concept_id = row[0];
    r.frequency = parse_double(row[1]);
    r.mean_score = parse_double(row[2]);
    r.variance = parse_double(row[3]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ImitationRecord> parse_prompt_scores_csv(std::string_view text) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, std::vector<PromptScore>>> groups;
  for (const auto& row : parse_csv_table(text, kPromptHeader)) {
    auto [it, inserted] = groups.try_emplace(row[0]);
    if (inserted) {
      order.push_back(row[0]);
      it->second.first = parse_double(row[1]);
    }
    it->second.second.push_back({row[2], parse_double(row[3])});
  }
  std::vector<ImitationRecord> out;
  for (const auto& id : order) {
    auto& g = groups.at(id);
    out.push_back(aggregate_prompts(std::move(g.second), g.first, id));
  }
  return out;
}

}  // namespace imthresh
