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

#ifndef IMTHRESH_SYNTHETIC_HPP_
#define IMTHRESH_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "imthresh/filtering.hpp"
#include "imthresh/manifest.hpp"

namespace imthresh {

// Parameters of a synthetic domain with a planted imitation threshold.
// Concepts at or above `planted_threshold` imitate at `high_score_mean`,
// the rest at `low_score_mean`; per-concept Gaussian noise of `noise_std` is
// added to the target score.
struct SyntheticDomainSpec {
  std::size_t n_concepts = 400;
  std::size_t dim = 64;
  double freq_min = 1.0;
  double freq_max = 100000.0;
  double planted_threshold = 112.0;
  double low_score_mean = 0.2;
  double high_score_mean = 0.5;
  double noise_std = 0.06;
  std::size_t refs_per_concept = 5;
  std::size_t candidates_per_concept = 20;
  std::size_t generated_per_concept = 5;  // rows per prompt
  std::size_t n_prompts = 5;
  double contamination_rate = 0.4;
  std::uint64_t seed = 0;

  // Geometry knobs. Reference and on-concept training rows sit at cosine
  // `concept_cosine` from their anchor; anchors are pairwise below
  // `anchor_margin`; contaminants stay below `contaminant_margin` against
  // every reference of their concept.
  double concept_cosine = 0.9;
  double anchor_margin = 0.5;
  double contaminant_margin = 0.3;
};

struct ConceptTruth {
  std::string concept_id;
  double frequency = 0.0;
  double target_score = 0.0;
  bool above_threshold = false;
  std::size_t on_concept_candidates = 0;
};

struct SyntheticTruth {
  double planted_threshold = 0.0;
  // Position, in the frequency-sorted series, of the first concept at or
  // above the planted threshold.
  std::size_t planted_index = 0;
  double planted_frequency = 0.0;
  std::vector<ConceptTruth> per_concept;  // in concept order
};

struct SyntheticDomain {
  DomainData data;
  SyntheticTruth truth;
};

// Deterministic in `spec` (including the seed). Frequencies are integers,
// log-spaced over [freq_min, freq_max]; when the planted threshold is an
// integer, the first concept at or above it is given exactly that frequency.
// The manifest carries sample_cap = 0 so every concept goes through ratio
// extrapolation, which reproduces the planted frequencies exactly.
SyntheticDomain generate_domain(const SyntheticDomainSpec& spec);

// Writes manifest.json, the .emb files and truth.json under `dir`.
std::filesystem::path write_synthetic_domain(const SyntheticDomain& domain,
                                             const std::filesystem::path& dir);

std::string truth_json(const SyntheticTruth& truth);

// One concept whose candidate pool is split between two names.
struct AliasPair {
  ConceptInput full;
  ConceptInput first;
  ConceptInput second;
  ConceptRecord first_record;
  ConceptRecord second_record;
  CalibratedThreshold threshold;
  std::uint64_t ground_truth_count = 0;
};

// Generates a domain from `spec` (n_concepts >= 2), calibrates on its
// references and splits concept 0's candidates: the first
// round(split_fraction * n) rows go to the first alias, the rest to the
// second. Records use the default sample cap.
AliasPair generate_alias_pair(const SyntheticDomainSpec& spec,
                              double split_fraction);

}  // namespace imthresh

#endif  // IMTHRESH_SYNTHETIC_HPP_
