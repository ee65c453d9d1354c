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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "imthresh/errors.hpp"
#include "imthresh/filtering.hpp"

using namespace imthresh;

namespace {

CalibratedThreshold at(double v) {
  CalibratedThreshold t;
  t.value = v;
  return t;
}

ConceptRecord record(std::string id, std::uint64_t caption, std::uint64_t retrieved,
                     std::uint64_t positive, double frequency) {
  ConceptRecord r;
  r.concept_id = std::move(id);
  r.name = r.concept_id;
  r.caption_count = caption;
  r.retrieved_count = retrieved;
  r.positive_count = positive;
  r.estimated_frequency = frequency;
  return r;
}

}  // namespace

TEST_CASE("reference filtering") {
  const EmbeddingMatrix refs(2, {1, 0, 0.6F, 0.8F}, {"r0", "r1"});
  SUBCASE("identical candidate kept, orthogonal rejected") {
    const EmbeddingMatrix cands(3, {1, 0, 0, 0, 0, 1}, {"same", "orth"});
    const EmbeddingMatrix refs3(3, {1, 0, 0}, {"r"});
    const auto r = filter_candidates(cands, refs3, at(0.46));
    CHECK(r.kept_ids() == std::vector<std::string>{"same"});
    CHECK(r.rejected_ids() == std::vector<std::string>{"orth"});
    CHECK(r.decisions[0].max_sim == 1.0);
    CHECK(r.decisions[1].reason == FilterReason::kBelowThreshold);
  }
  SUBCASE("random candidates against the per-candidate max loop") {
    std::mt19937_64 rng(4);
    std::normal_distribution<float> g(0.0F, 1.0F);
    std::vector<float> cd(5 * 2), rd(3 * 2);
    for (auto& x : cd) x = g(rng);
    for (auto& x : rd) x = g(rng);
    const EmbeddingMatrix cands(2, cd, {"c0", "c1", "c2", "c3", "c4"});
    const EmbeddingMatrix refs3(2, rd, {"r0", "r1", "r2"});
    const auto r = filter_candidates(cands, refs3, at(0.3));
    std::size_t kept = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      double best = -2.0;
      for (std::size_t j = 0; j < 3; ++j) {
        best = std::max(best, cosine_similarity(cands.row(i), refs3.row(j)));
      }
      CHECK(r.decisions[i].max_sim == best);
      CHECK(r.decisions[i].kept() == (best >= 0.3));
      kept += best >= 0.3;
    }
    CHECK(r.kept_count() == kept);
    CHECK(r.kept_rows().size() + r.rejected_ids().size() == 5);
  }
  SUBCASE("boundary value is kept") {
    const EmbeddingMatrix cands(2, {0, 1}, {"c"});
    const double sim = max_similarity_to_refs(cands.row(0), refs);
    CHECK(filter_candidates(cands, refs, at(sim)).kept_count() == 1);
    CHECK(filter_candidates(cands, refs, at(std::nextafter(sim, 2.0))).kept_count() == 0);
  }
}

TEST_CASE("two-stage art filtering") {
  // Candidate 0 looks like art and like the style; candidate 1 is on style
  // but fails the artness cut.
  const EmbeddingMatrix cands(2, {1, 0.2F, 1, -0.5F}, {"art", "photo"});
  const EmbeddingMatrix style(2, {1, 0}, {"s"});
  const std::vector<float> axis{0.3F, 1};
  const auto r = two_stage_art_filter(cands, axis, 0.182, style, at(0.278));
  CHECK(r.decisions[0].reason == FilterReason::kKept);
  CHECK(r.decisions[1].reason == FilterReason::kNonArt);

  const auto all = two_stage_art_filter(cands, axis, -1.0, style, at(-1.0));
  CHECK(all.kept_count() == 2);

  std::map<std::string, double, std::less<>> scores{{"art", 0.3}, {"photo", 0.1}};
  const auto by_score = two_stage_art_filter(cands, scores, 0.182, style, at(0.278));
  CHECK(by_score.kept_ids() == std::vector<std::string>{"art"});
  scores.erase("photo");
  CHECK_THROWS_AS(two_stage_art_filter(cands, scores, 0.182, style, at(0.278)), FormatError);
}

TEST_CASE("frequency estimation") {
  const auto big = estimate_frequency(200000, 10000, 6000);
  CHECK(big.value == 120000.0);
  CHECK(big.extrapolated);
  CHECK(estimate_frequency(500, 500, 320).value == 320.0);
  CHECK_FALSE(estimate_frequency(500, 500, 320).extrapolated);
  CHECK(estimate_frequency(200000, 10000, 0).value == 0.0);
  CHECK(estimate_frequency(0, 0, 0).value == 0.0);
  const auto none = estimate_frequency(200000, 0, 0);
  CHECK(none.value == 0.0);
  CHECK(none.no_retrieved_warning);
  CHECK_THROWS_AS(estimate_frequency(10, 5, 6), DomainError);
  CHECK_THROWS_AS(estimate_frequency(10, 11, 0), DomainError);
  // Extrapolation never shrinks the positive count.
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t caption = std::uniform_int_distribution<std::uint64_t>(100001, 1 << 24)(rng);
    const std::uint64_t retrieved = std::uniform_int_distribution<std::uint64_t>(1, 100000)(rng);
    const std::uint64_t positive = std::uniform_int_distribution<std::uint64_t>(0, retrieved)(rng);
    CHECK(estimate_frequency(caption, retrieved, positive).value >= static_cast<double>(positive));
  }
}

TEST_CASE("alias merging") {
  const std::vector<ConceptRecord> pair{record("thandie", 172, 172, 172, 172),
                                        record("thandiwe", 12177, 12177, 12177, 12177)};
  const auto merged = merge_aliases(pair);
  CHECK(merged.estimated_frequency == 12349.0);
  CHECK(merged.concept_id == "thandie");
  CHECK(merged.aliases == std::vector<std::string>{"thandiwe"});
  const std::vector<ConceptRecord> belle{record("belle", 394, 394, 394, 394),
                                         record("mary", 310, 310, 310, 310)};
  CHECK(merge_aliases(belle).estimated_frequency == 704.0);
  const std::vector<ConceptRecord> one{record("solo", 10, 8, 4, 4)};
  CHECK(merge_aliases(one).estimated_frequency == 4.0);
  CHECK(merge_aliases(one).positive_count == 4);
  CHECK_THROWS_AS(merge_aliases(std::vector<ConceptRecord>{}), DomainError);
}

TEST_CASE("concept table round trip") {
  auto a = record("c,1", 10, 8, 4, 4.5);
  a.aliases = {"x", "y"};
  const std::vector<ConceptRecord> records{a, record("c\"2", 0, 0, 0, 0)};
  const auto text = concept_table_csv(records);
  CHECK(text.rfind("concept_id,name,domain,caption_count", 0) == 0);
  CHECK(parse_concept_table_csv(text) == records);
  CHECK_THROWS_AS(parse_concept_table_csv("concept_id\n1\n"), FormatError);
}
