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

#include "imthresh/filtering.hpp"

#include <algorithm>

#include "imthresh/errors.hpp"
#include "imthresh/text_format.hpp"

namespace imthresh {
namespace {

const std::vector<std::string> kConceptHeader = {
    "concept_id",      "name",           "domain",
    "caption_count",   "retrieved_count", "positive_count",
    "estimated_frequency", "aliases"};

std::vector<double> reference_max_sims(const EmbeddingMatrix& candidates,
                                       const EmbeddingMatrix& refs) {
  if (refs.empty()) throw DomainError("filter: empty reference set");
  if (candidates.dim() != refs.dim()) {
    throw FormatError("filter: candidate dim " +
                      std::to_string(candidates.dim()) +
                      " does not match reference dim " +
                      std::to_string(refs.dim()));
  }
  const auto sims = pairwise_similarity(candidates, refs);
  std::vector<double> out(candidates.count());
  for (std::size_t i = 0; i < candidates.count(); ++i) {
    const double* row = sims.values.data() + i * sims.cols;
    out[i] = *std::max_element(row, row + sims.cols);
  }
  return out;
}

FilterResult combine(const EmbeddingMatrix& candidates,
                     const std::vector<double>& artness,
                     double artness_threshold,
                     const std::vector<double>& style_sims,
                     double style_threshold) {
  FilterResult result;
  result.decisions.reserve(candidates.count());
  for (std::size_t i = 0; i < candidates.count(); ++i) {
    FilterReason reason = FilterReason::kKept;
    if (!(artness[i] >= artness_threshold)) {
      reason = FilterReason::kNonArt;
    } else if (!(style_sims[i] >= style_threshold)) {
      reason = FilterReason::kBelowThreshold;
    }
    result.decisions.push_back({candidates.id(i), style_sims[i], reason});
  }
  return result;
}

std::vector<std::string> split_aliases(std::string_view text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(';', start);
    out.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(ConceptDomain domain) {
  switch (domain) {
    case ConceptDomain::kFaces:
      return "faces";
    case ConceptDomain::kArt:
      return "art";
    case ConceptDomain::kSynthetic:
      return "synthetic";
  }
  return "?";
}

ConceptDomain parse_domain(std::string_view text) {
  if (text == "faces") return ConceptDomain::kFaces;
  if (text == "art") return ConceptDomain::kArt;
  if (text == "synthetic") return ConceptDomain::kSynthetic;
  throw FormatError("unknown domain '" + std::string(text) + "'");
}

std::string_view to_string(FilterReason reason) {
  switch (reason) {
    case FilterReason::kKept:
      return "kept";
    case FilterReason::kBelowThreshold:
      return "below-threshold";
    case FilterReason::kNonArt:
      return "non-art";
  }
  return "?";
}

FilterReason parse_filter_reason(std::string_view text) {
  if (text == "kept") return FilterReason::kKept;
  if (text == "below-threshold") return FilterReason::kBelowThreshold;
  if (text == "non-art") return FilterReason::kNonArt;
  throw FormatError("unknown filter reason '" + std::string(text) + "'");
}

std::vector<std::string> FilterResult::kept_ids() const {
  std::vector<std::string> out;
  for (const auto& d : decisions) {
    if (d.kept()) out.push_back(d.id);
  }
  return out;
}

std::vector<std::string> FilterResult::rejected_ids() const {
  std::vector<std::string> out;
  for (const auto& d : decisions) {
    if (!d.kept()) out.push_back(d.id);
  }
  return out;
}

std::vector<std::size_t> FilterResult::kept_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i].kept()) out.push_back(i);
  }
  return out;
}

std::size_t FilterResult::kept_count() const {
  return static_cast<std::size_t>(std::count_if(
      decisions.begin(), decisions.end(),
      [](const CandidateDecision& d) { return d.kept(); }));
}

FilterResult filter_candidates(const EmbeddingMatrix& candidates,
                               const EmbeddingMatrix& refs,
                               const CalibratedThreshold& threshold) {
  const auto sims = reference_max_sims(candidates, refs);
  // No stage 1: every candidate passes it.
  const std::vector<double> pass(candidates.count(), 0.0);
  return combine(candidates, pass, 0.0, sims, threshold.value);
}

FilterResult two_stage_art_filter(const EmbeddingMatrix& candidates,
                                  std::span<const float> artness_axis,
                                  double artness_threshold,
                                  const EmbeddingMatrix& style_refs,
                                  const CalibratedThreshold& style_threshold) {
  const auto artness = similarity_to_axis(candidates, artness_axis);
  return combine(candidates, artness, artness_threshold,
                 reference_max_sims(candidates, style_refs),
                 style_threshold.value);
}

FilterResult two_stage_art_filter(
    const EmbeddingMatrix& candidates,
    const std::map<std::string, double, std::less<>>& artness_scores,
    double artness_threshold, const EmbeddingMatrix& style_refs,
    const CalibratedThreshold& style_threshold) {
  std::vector<double> artness(candidates.count());
  for (std::size_t i = 0; i < candidates.count(); ++i) {
    const auto it = artness_scores.find(candidates.id(i));
    if (it == artness_scores.end()) {
      throw FormatError("two_stage_art_filter: missing artness score for '" +
                        candidates.id(i) + "'");
    }
    artness[i] = it->second;
  }
  return combine(candidates, artness, artness_threshold,
                 reference_max_sims(candidates, style_refs),
                 style_threshold.value);
}

FrequencyEstimate estimate_frequency(std::uint64_t caption_count,
                                     std::uint64_t retrieved_count,
                                     std::uint64_t positive_count,
                                     std::uint64_t sample_cap) {
  if (positive_count > retrieved_count) {
    throw DomainError("estimate_frequency: positive_count " +
                      std::to_string(positive_count) +
                      " exceeds retrieved_count " +
                      std::to_string(retrieved_count));
  }
  if (retrieved_count > caption_count) {
    throw DomainError("estimate_frequency: retrieved_count " +
                      std::to_string(retrieved_count) +
                      " exceeds caption_count " + std::to_string(caption_count));
  }
  if (caption_count <= sample_cap) {
    return {static_cast<double>(positive_count), false, false};
  }
  if (retrieved_count == 0) return {0.0, true, true};
  return {static_cast<double>(caption_count) *
              static_cast<double>(positive_count) /
              static_cast<double>(retrieved_count),
          true, false};
}

ConceptRecord merge_aliases(std::span<const ConceptRecord> records) {
  if (records.empty()) throw DomainError("merge_aliases: no records");
  ConceptRecord merged = records.front();
  std::vector<double> frequencies;
  frequencies.reserve(records.size());
  frequencies.push_back(merged.estimated_frequency);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.domain != merged.domain) {
      throw DomainError("merge_aliases: '" + r.concept_id + "' is in domain " +
                        std::string(to_string(r.domain)) + ", expected " +
                        std::string(to_string(merged.domain)));
    }
    merged.caption_count += r.caption_count;
    merged.retrieved_count += r.retrieved_count;
    merged.positive_count += r.positive_count;
    frequencies.push_back(r.estimated_frequency);
    merged.aliases.push_back(r.concept_id);
    merged.aliases.insert(merged.aliases.end(), r.aliases.begin(),
                          r.aliases.end());
  }
  // Summing in sorted order makes the total independent of input order.
  std::sort(frequencies.begin(), frequencies.end());
  double total = 0.0;
  for (double f : frequencies) total += f;
  merged.estimated_frequency = total;
  return merged;
}

std::string concept_table_csv(std::span<const ConceptRecord> records) {
  std::string out = csv_row(kConceptHeader);
  for (const auto& r : records) {
    std::string aliases;
    for (const auto& a : r.aliases) aliases += (aliases.empty() ? "" : ";") + a;
    out += csv_row({r.concept_id, r.name, std::string(to_string(r.domain)),
                    std::to_string(r.caption_count),
                    std::to_string(r.retrieved_count),
                    std::to_string(r.positive_count),
                    format_double(r.estimated_frequency), aliases});
  }
  return out;
}

std::vector<ConceptRecord> parse_concept_table_csv(std::string_view text) {
  std::vector<ConceptRecord> records;
  for (auto& row : parse_csv_table(text, kConceptHeader)) {
    ConceptRecord r;
    r.concept_id = row[0];
    r.name = row[1];
    r.domain = parse_domain(row[2]);
    r.caption_count = parse_u64(row[3]);
    r.retrieved_count = parse_u64(row[4]);
    r.positive_count = parse_u64(row[5]);
    r.estimated_frequency = parse_double(row[6]);
    r.aliases = split_aliases(row[7]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace imthresh
