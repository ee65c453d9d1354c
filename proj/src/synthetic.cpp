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

#include "imthresh/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <json.hpp>

#include "imthresh/calibration.hpp"
#include "imthresh/errors.hpp"
#include "imthresh/text_format.hpp"

namespace imthresh {
namespace {

constexpr int kMaxRejections = 10000;

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(Vec& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

Vec random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec v(dim);
  for (double& x : v) x = normal(rng);
  normalize(v);
  return v;
}

// Orthonormal set grown by Gram-Schmidt.
class Basis {
 public:
  explicit Basis(std::size_t dim) : dim_(dim) {}

  std::size_t size() const { return vectors_.size(); }

  // Random unit vector orthogonal to every basis vector.
  Vec random_orthogonal(std::mt19937_64& rng) const {
    Vec v = random_unit(dim_, rng);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : vectors_) {
        const double d = dot(v, b);
        for (std::size_t i = 0; i < dim_; ++i) v[i] -= d * b[i];
      }
    }
    normalize(v);
    return v;
  }

  // Adds a vector already orthogonal to the basis, while there is room to
  // keep drawing orthogonal directions afterwards.
  void add_if_room(const Vec& v) {
    if (vectors_.size() + 2 <= dim_) vectors_.push_back(v);
  }

 private:
  std::size_t dim_;
  std::vector<Vec> vectors_;
};

Vec combine(double ca, const Vec& a, double cb, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ca * a[i] + cb * b[i];
  return out;
}

void append(std::vector<float>& data, const Vec& v) {
  for (double x : v) data.push_back(static_cast<float>(x));
}

std::string padded(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, i);
  return buf;
}

std::mt19937_64 concept_rng(std::uint64_t seed, std::size_t concept_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(concept_index), 0x5eedu};
  return std::mt19937_64(seq);
}

void validate(const SyntheticDomainSpec& s) {
  auto fail = [](const std::string& m) { throw DomainError("synthetic spec: " + m); };
  if (s.n_concepts < 2) fail("n_concepts must be at least 2");
  if (s.dim < 2) fail("dim must be at least 2");
  if (!(s.freq_min >= 0.0) || !(s.freq_max > s.freq_min)) {
    fail("need 0 <= freq_min < freq_max");
  }
  if (!(s.planted_threshold >= s.freq_min && s.planted_threshold <= s.freq_max)) {
    fail("planted_threshold must lie within [freq_min, freq_max]");
  }
  if (!(s.low_score_mean < s.high_score_mean)) {
    fail("low_score_mean must be below high_score_mean");
  }
  if (!(s.noise_std >= 0.0)) fail("noise_std must be non-negative");
  if (s.refs_per_concept < 2) fail("refs_per_concept must be at least 2");
  if (s.candidates_per_concept < 1) fail("candidates_per_concept must be positive");
  if (s.generated_per_concept < 1 || s.n_prompts < 1) {
    fail("need at least one generated row and one prompt");
  }
  if (!(s.contamination_rate >= 0.0 && s.contamination_rate < 1.0)) {
    fail("contamination_rate must be in [0, 1)");
  }
  if (!(s.concept_cosine > 0.0 && s.concept_cosine < 1.0)) {
    fail("concept_cosine must be in (0, 1)");
  }
}

std::vector<double> log_spaced_frequencies(const SyntheticDomainSpec& s) {
  // With freq_min == 0 the grid is log-spaced in (f + 1) so the head is 0.
  const double shift = s.freq_min > 0.0 ? 0.0 : 1.0;
  const double lo = std::log(s.freq_min + shift);
  const double hi = std::log(s.freq_max + shift);
  std::vector<double> f(s.n_concepts);
  for (std::size_t i = 0; i < s.n_concepts; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(s.n_concepts - 1);
    f[i] = std::max(0.0, std::round(std::exp(lo + t * (hi - lo)) - shift));
  }
  const auto planted = std::lower_bound(f.begin(), f.end(), s.planted_threshold);
  if (planted != f.end() &&
      s.planted_threshold == std::floor(s.planted_threshold)) {
    *planted = s.planted_threshold;
  }
  return f;
}

// Number of on-concept rows among `retrieved` such that
// caption = frequency * retrieved / on_concept is an integer, closest to the
// requested contamination.
std::uint64_t pick_on_concept(std::uint64_t frequency, std::uint64_t retrieved,
                              double contamination) {
  const double want = (1.0 - contamination) * static_cast<double>(retrieved);
  std::uint64_t best = retrieved;
  double best_gap = std::abs(want - static_cast<double>(retrieved));
  for (std::uint64_t m = retrieved; m >= 1; --m) {
    if ((frequency * retrieved) % m != 0) continue;
    const double gap = std::abs(want - static_cast<double>(m));
    if (gap < best_gap) {
      best_gap = gap;
      best = m;
    }
  }
  return best;
}

std::vector<Vec> draw_anchors(const SyntheticDomainSpec& s, std::mt19937_64& rng) {
  std::vector<Vec> anchors;
  anchors.reserve(s.n_concepts);
  while (anchors.size() < s.n_concepts) {
    int tries = 0;
    while (true) {
      Vec a = random_unit(s.dim, rng);
      const bool ok = std::all_of(anchors.begin(), anchors.end(), [&](const Vec& b) {
        return std::abs(dot(a, b)) < s.anchor_margin;
      });
      if (ok) {
        anchors.push_back(std::move(a));
        break;
      }
      if (++tries > kMaxRejections) {
        throw DomainError("synthetic spec: cannot place " +
                          std::to_string(s.n_concepts) + " anchors in dim " +
                          std::to_string(s.dim) + " with pairwise cosine below " +
                          std::to_string(s.anchor_margin));
      }
    }
  }
  return anchors;
}

struct ConceptDraw {
  std::uint64_t on_concept = 0;
  std::uint64_t contaminants = 0;
  double target_score = 0.0;
};

// Builds refs, candidates and generated rows for one concept. Generated rows
// are orthogonal to every perturbation direction while the dimension allows,
// making their similarity to any on-concept row exactly
// target_score (up to float32 rounding).
ConceptInput build_concept(const SyntheticDomainSpec& s, const std::string& id,
                           const Vec& anchor, const ConceptDraw& draw,
                           std::mt19937_64& rng) {
  const double c = s.concept_cosine;
  const double sn = std::sqrt(1.0 - c * c);
  Basis basis(s.dim);
  basis.add_if_room(anchor);

  ConceptInput out;
  out.id = id;
  out.name = id;

  std::vector<Vec> ref_rows;
  std::vector<float> data;
  std::vector<std::string> ids;
  for (std::size_t r = 0; r < s.refs_per_concept; ++r) {
    const Vec v = basis.random_orthogonal(rng);
    basis.add_if_room(v);
    ref_rows.push_back(combine(c, anchor, sn, v));
    append(data, ref_rows.back());
    ids.push_back(id + "/ref" + std::to_string(r));
  }
  out.refs = EmbeddingMatrix(s.dim, std::move(data), std::move(ids));

  const std::uint64_t total = draw.on_concept + draw.contaminants;
  std::vector<bool> is_on(total, false);
  std::fill(is_on.begin(), is_on.begin() + static_cast<std::ptrdiff_t>(draw.on_concept), true);
  std::shuffle(is_on.begin(), is_on.end(), rng);
  data.clear();
  ids.clear();
  for (std::uint64_t j = 0; j < total; ++j) {
    Vec row;
    if (is_on[j]) {
      const Vec w = basis.random_orthogonal(rng);
      basis.add_if_room(w);
      row = combine(c, anchor, sn, w);
    } else {
      int tries = 0;
      while (true) {
        row = random_unit(s.dim, rng);
        double worst = 0.0;
        for (const auto& r : ref_rows) worst = std::max(worst, dot(row, r));
        if (worst < s.contaminant_margin) break;
        if (++tries > kMaxRejections) {
          throw DomainError("synthetic spec: cannot draw contaminants below margin " +
                            std::to_string(s.contaminant_margin) + " in dim " +
                            std::to_string(s.dim));
        }
      }
    }
    append(data, row);
    ids.push_back(id + "/cand" + std::to_string(j));
  }
  out.candidates = EmbeddingMatrix(s.dim, std::move(data), std::move(ids));

  const double strength = std::clamp(draw.target_score / c, -1.0, 1.0);
  const double rest = std::sqrt(1.0 - strength * strength);
  for (std::size_t p = 0; p < s.n_prompts; ++p) {
    data.clear();
    ids.clear();
    for (std::size_t g = 0; g < s.generated_per_concept; ++g) {
      const Vec u = basis.random_orthogonal(rng);
      append(data, combine(strength, anchor, rest, u));
      ids.push_back(id + "/p" + std::to_string(p) + "/gen" + std::to_string(g));
    }
    out.generated.push_back(
        {"p" + std::to_string(p), EmbeddingMatrix(s.dim, std::move(data), std::move(ids))});
  }
  return out;
}

}  // namespace

SyntheticDomain generate_domain(const SyntheticDomainSpec& spec) {
  validate(spec);
  const std::size_t needed = 2 + spec.refs_per_concept + spec.candidates_per_concept;
  if (spec.dim < needed) {
    throw DomainError("synthetic spec: dim " + std::to_string(spec.dim) +
                      " too small, need at least " + std::to_string(needed) +
                      " (refs + candidates + 2) for exact concept geometry");
  }
  std::mt19937_64 master(spec.seed);
  const auto anchors = draw_anchors(spec, master);
  const auto frequencies = log_spaced_frequencies(spec);

  SyntheticDomain out;
  out.data.domain = ConceptDomain::kSynthetic;
  out.data.sample_cap = 0;
  out.truth.planted_threshold = spec.planted_threshold;
  out.truth.planted_index = spec.n_concepts;

  for (std::size_t i = 0; i < spec.n_concepts; ++i) {
    auto rng = concept_rng(spec.seed, i);
    const auto freq = static_cast<std::uint64_t>(frequencies[i]);
    const bool above = frequencies[i] >= spec.planted_threshold;
    if (above && out.truth.planted_index == spec.n_concepts) {
      out.truth.planted_index = i;
      out.truth.planted_frequency = frequencies[i];
    }
    std::normal_distribution<double> noise(0.0, 1.0);
    const double base = above ? spec.high_score_mean : spec.low_score_mean;
    ConceptDraw draw;
    draw.target_score = base + spec.noise_std * noise(rng);

    std::uint64_t caption = 0;
    const std::uint64_t m = spec.candidates_per_concept;
    if (freq == 0) {
      // Nothing to retrieve.
    } else if (freq <= m) {
      draw.on_concept = freq;
      draw.contaminants = static_cast<std::uint64_t>(std::llround(
          spec.contamination_rate * static_cast<double>(freq) /
          (1.0 - spec.contamination_rate)));
      draw.contaminants = std::min(draw.contaminants, m - freq);
      caption = draw.on_concept + draw.contaminants;
    } else {
      draw.on_concept = pick_on_concept(freq, m, spec.contamination_rate);
      draw.contaminants = m - draw.on_concept;
      caption = freq * m / draw.on_concept;
    }

    auto input = build_concept(spec, padded("c", i), anchors[i], draw, rng);
    input.caption_count = caption;
    out.truth.per_concept.push_back(
        {input.id, frequencies[i], draw.target_score, above, draw.on_concept});
    out.data.concepts.push_back(std::move(input));
  }
  return out;
}

std::string truth_json(const SyntheticTruth& truth) {
  nlohmann::json doc;
  doc["planted_threshold"] = truth.planted_threshold;
  doc["planted_index"] = truth.planted_index;
  doc["planted_frequency"] = truth.planted_frequency;
  auto per = nlohmann::json::array();
  for (const auto& t : truth.per_concept) {
    per.push_back({{"concept_id", t.concept_id},
                   {"frequency", t.frequency},
                   {"target_score", t.target_score},
                   {"above_threshold", t.above_threshold},
                   {"on_concept_candidates", t.on_concept_candidates}});
  }
  doc["per_concept_truth"] = std::move(per);
  return doc.dump(2) + "\n";
}

std::filesystem::path write_synthetic_domain(const SyntheticDomain& domain,
                                             const std::filesystem::path& dir) {
  const auto manifest = write_domain(domain.data, dir);
  write_text_file(dir / "truth.json", truth_json(domain.truth));
  return manifest;
}

AliasPair generate_alias_pair(const SyntheticDomainSpec& spec,
                              double split_fraction) {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw DomainError("generate_alias_pair: split_fraction must be in (0, 1)");
  }
  validate(spec);
  std::mt19937_64 master(spec.seed);
  const auto anchors = draw_anchors(spec, master);

  std::vector<EmbeddingMatrix> refs;
  AliasPair pair;
  for (std::size_t i = 0; i < spec.n_concepts; ++i) {
    auto rng = concept_rng(spec.seed, i);
    ConceptDraw draw;
    draw.target_score = spec.high_score_mean;
    if (i == 0) {
      const auto m = spec.candidates_per_concept;
      draw.contaminants = static_cast<std::uint64_t>(
          std::llround(spec.contamination_rate * static_cast<double>(m)));
      draw.on_concept = m - draw.contaminants;
      pair.full = build_concept(spec, padded("alias", i), anchors[i], draw, rng);
      pair.full.caption_count = m;
      pair.ground_truth_count = draw.on_concept;
      refs.push_back(pair.full.refs);
    } else {
      refs.push_back(build_concept(spec, padded("c", i), anchors[i], draw, rng).refs);
    }
  }
  pair.threshold = f1_max_threshold(collect_pair_similarities(refs));

  const std::size_t n = pair.full.candidates.count();
  const auto split = static_cast<std::size_t>(
      std::llround(split_fraction * static_cast<double>(n)));
  if (split == 0 || split == n) {
    throw DomainError("generate_alias_pair: split_fraction leaves one alias empty");
  }
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  auto part = [&](std::size_t begin, std::size_t end, const char* suffix) {
    ConceptInput c = pair.full;
    c.id = pair.full.id + suffix;
    c.name = c.id;
    c.candidates = pair.full.candidates.select_rows(
        std::span<const std::size_t>(rows).subspan(begin, end - begin));
    c.caption_count = end - begin;
    const auto filtered = filter_candidates(c.candidates, c.refs, pair.threshold);
    ConceptRecord rec;
    rec.concept_id = c.id;
    rec.name = c.name;
    rec.domain = ConceptDomain::kSynthetic;
    rec.caption_count = c.caption_count;
    rec.retrieved_count = c.candidates.count();
    rec.positive_count = filtered.kept_count();
    rec.estimated_frequency =
        estimate_frequency(rec.caption_count, rec.retrieved_count, rec.positive_count)
            .value;
    return std::pair{std::move(c), std::move(rec)};
  };
  std::tie(pair.first, pair.first_record) = part(0, split, "-a");
  std::tie(pair.second, pair.second_record) = part(split, n, "-b");
  return pair;
}

}  // namespace imthresh
