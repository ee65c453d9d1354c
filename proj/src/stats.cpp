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

#include "imthresh/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "imthresh/errors.hpp"

namespace imthresh {

std::vector<double> isotonic_fit(std::span<const double> y) {
  if (y.empty()) throw DomainError("isotonic_fit: empty input");
  struct Block {
    double sum;
    std::size_t len;
    double mean() const { return sum / static_cast<double>(len); }
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (double v : y) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().len += top.len;
    }
  }
  std::vector<double> fit;
  fit.reserve(y.size());
  for (const auto& b : blocks) fit.insert(fit.end(), b.len, b.mean());
  return fit;
}

std::vector<double> isotonic_fit(const ScoreSeries& series) {
  return isotonic_fit(series.scores());
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("spearman: length mismatch");
  if (x.size() < 2) throw DomainError("spearman: need at least 2 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(rx.size());
  const double mean = (n + 1.0) / 2.0;  // mean of mid-ranks is always (n+1)/2
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedStatisticError("spearman: correlation undefined for constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

NormalizedRatings normalize_ratings(
    const std::map<std::string, std::vector<double>>& per_participant) {
  if (per_participant.empty()) {
    throw DomainError("normalize_ratings: no participants");
  }
  NormalizedRatings out;
  for (const auto& [participant, ratings] : per_participant) {
    if (ratings.size() < 2) {
      throw DomainError("normalize_ratings: participant '" + participant +
                        "' has fewer than 2 ratings");
    }
    const double n = static_cast<double>(ratings.size());
    double sum = 0.0;
    for (double r : ratings) sum += r;
    const double mean = sum / n;
    double ss = 0.0;
    for (double r : ratings) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / n);
    auto& z = out.ratings[participant];
    z.reserve(ratings.size());
    if (sd == 0.0) {
      z.assign(ratings.size(), 0.0);
      out.constant_raters.push_back(participant);
      continue;
    }
    for (double r : ratings) z.push_back((r - mean) / sd);
  }
  return out;
}

AgreementInput make_agreement_input(std::span<const double> human_ratings,
                                    std::span<const double> frequencies,
                                    double imitation_threshold) {
  if (human_ratings.size() != frequencies.size()) {
    throw DomainError("agreement: ratings and frequencies differ in length");
  }
  AgreementInput in;
  for (std::size_t i = 0; i < human_ratings.size(); ++i) {
    in.human_binary.push_back(human_ratings[i] >= kHumanPositiveRating ? 1 : 0);
    in.predicted_binary.push_back(frequencies[i] >= imitation_threshold ? 1 : 0);
  }
  return in;
}

double threshold_agreement(const AgreementInput& input, AgreementMode mode) {
  const auto& h = input.human_binary;
  const auto& p = input.predicted_binary;
  if (h.size() != p.size()) {
    throw DomainError("threshold_agreement: length mismatch (" +
                      std::to_string(h.size()) + " vs " +
                      std::to_string(p.size()) + ")");
  }
  if (h.empty()) throw DomainError("threshold_agreement: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] > 1 || p[i] > 1) {
      throw DomainError("threshold_agreement: values must be 0 or 1");
    }
    hits += mode == AgreementMode::kMatch ? (h[i] == p[i]) : (h[i] & p[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(h.size());
}

InvarianceResult invariance_check(std::span<const ImitationRecord> records,
                                  double delta) {
  if (records.size() < 2) {
    throw DomainError("invariance_check: need at least 2 records");
  }
  std::vector<const ImitationRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    if (a->frequency != b->frequency) return a->frequency < b->frequency;
    return a->concept_id < b->concept_id;
  });
  std::vector<double> diffs;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (!(std::abs(sorted[j]->frequency - sorted[i]->frequency) < delta)) break;
      diffs.push_back(sorted[j]->mean_score - sorted[i]->mean_score);
    }
  }
  InvarianceResult out;
  out.pair_count = diffs.size();
  out.empty = diffs.empty();
  if (diffs.empty()) return out;
  const double n = static_cast<double>(diffs.size());
  double sum = 0.0;
  for (double d : diffs) sum += d;
  out.value = sum / n;
  if (diffs.size() > 1) {
    double ss = 0.0;
    for (double d : diffs) ss += (d - out.value) * (d - out.value);
    out.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

MissRate caption_miss_rate(std::uint64_t detected_total,
                           std::uint64_t detected_with_mention,
                           double corpus_size, std::uint64_t sample_size) {
  if (detected_with_mention > detected_total) {
    throw DomainError("caption_miss_rate: detected_with_mention exceeds detected_total");
  }
  if (sample_size == 0 || detected_total > sample_size) {
    throw DomainError("caption_miss_rate: detected_total exceeds the sample size");
  }
  if (!(corpus_size >= static_cast<double>(sample_size))) {
    throw DomainError("caption_miss_rate: corpus smaller than the sample");
  }
  MissRate out;
  out.miss_fraction = static_cast<double>(detected_total - detected_with_mention) /
                      static_cast<double>(sample_size);
  out.extrapolated_missed = out.miss_fraction * corpus_size;
  return out;
}

std::vector<GroupRates> fmr_tmr(std::span<const DemographicGroup> groups) {
  std::vector<GroupRates> out;
  for (const auto& group : groups) {
    const auto& members = group.members;
    if (members.size() < 2) {
      throw DomainError("fmr_tmr: group '" + group.group_id +
                        "' needs at least 2 members for FMR");
    }
    double tmr_sum = 0.0, fmr_sum = 0.0;
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto& faces = members[m].faces;
      if (faces.count() < 2) {
        throw DomainError("fmr_tmr: member '" + members[m].person_id +
                          "' needs at least 2 faces for TMR");
      }
      const auto within = pairwise_similarity(faces, faces);
      double sum = 0.0;
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < faces.count(); ++i) {
        for (std::size_t j = i + 1; j < faces.count(); ++j) {
          sum += within(i, j);
          ++pairs;
        }
      }
      tmr_sum += sum / static_cast<double>(pairs);

      double cross = 0.0;
      std::size_t cross_pairs = 0;
      for (std::size_t o = 0; o < members.size(); ++o) {
        if (o == m) continue;
        const auto sims = pairwise_similarity(faces, members[o].faces);
        for (double v : sims.values) cross += v;
        cross_pairs += sims.values.size();
      }
      fmr_sum += cross / static_cast<double>(cross_pairs);
    }
    const double k = static_cast<double>(members.size());
    out.push_back({group.group_id, fmr_sum / k, tmr_sum / k});
  }
  return out;
}

}  // namespace imthresh
