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

#ifndef IMTHRESH_MANIFEST_HPP_
#define IMTHRESH_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imthresh/embeddings.hpp"
#include "imthresh/filtering.hpp"

namespace imthresh {

using ArtnessScores = std::map<std::string, double, std::less<>>;

struct GeneratedSet {
  std::string prompt_id;
  EmbeddingMatrix embeddings;
};

// Everything the pipeline needs about one concept, loaded in memory.
struct ConceptInput {
  std::string id;
  std::string name;
  std::uint64_t caption_count = 0;
  EmbeddingMatrix refs{1};
  EmbeddingMatrix candidates{1};
  std::vector<GeneratedSet> generated;
  std::optional<ArtnessScores> artness_scores;
};

struct DomainData {
  ConceptDomain domain = ConceptDomain::kFaces;
  std::vector<ConceptInput> concepts;
  // Optional manifest-level defaults; command-line settings take precedence.
  std::optional<std::uint64_t> sample_cap;
  std::optional<double> artness_threshold;
};

// Manifest document (JSON):
//
//   {
//     "domain": "faces" | "art" | "synthetic",
//     "sample_cap": 100000,              optional
//     "artness_threshold": 0.182,        optional, art domain
//     "concepts": [{
//       "id": "...", "name": "...", "caption_count": 1234,
//       "refs": "refs/x.emb", "candidates": "cand/x.emb",
//       "generated": [{"prompt_id": "p0", "path": "gen/x_p0.emb"}, ...],
//       "artness_scores": "art/x.csv" | {"<candidate id>": 0.21, ...}
//     }, ...]
//   }
//
// Relative paths resolve against the manifest's directory. A CSV artness file
// has the header "id,score".
struct ManifestConcept {
  std::string id;
  std::string name;
  std::uint64_t caption_count = 0;
  std::filesystem::path refs;
  std::filesystem::path candidates;
  std::vector<std::pair<std::string, std::filesystem::path>> generated;
  std::optional<std::filesystem::path> artness_path;
  std::optional<ArtnessScores> artness_inline;
};

struct Manifest {
  ConceptDomain domain = ConceptDomain::kFaces;
  std::optional<std::uint64_t> sample_cap;
  std::optional<double> artness_threshold;
  std::vector<ManifestConcept> concepts;
};

// Parses and validates a manifest; every referenced file must exist. Throws
// ManifestError naming the offending concept.
Manifest load_manifest(const std::filesystem::path& path);

// Reads all embedding files referenced by the manifest.
DomainData load_domain(const Manifest& manifest, std::size_t parallelism = 1);

// Writes `data` as a manifest plus .emb files under `dir` (refs/, candidates/,
// generated/). Returns the manifest path.
std::filesystem::path write_domain(const DomainData& data,
                                   const std::filesystem::path& dir);

}  // namespace imthresh

#endif  // IMTHRESH_MANIFEST_HPP_
