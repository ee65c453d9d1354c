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

#include "imthresh/manifest.hpp"

#include <json.hpp>

#include "imthresh/emb_io.hpp"
#include "imthresh/errors.hpp"
#include "imthresh/parallel.hpp"
#include "imthresh/text_format.hpp"

namespace imthresh {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ManifestError(where + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ManifestError(where + ": field '" + key + "' has the wrong type");
  }
}

void require_file(const fs::path& p, const std::string& concept_id,
                  const char* what) {
  if (!fs::is_regular_file(p)) {
    throw ManifestError("concept '" + concept_id + "': " + what + " file " +
                        p.string() + " does not exist");
  }
}

ArtnessScores read_artness_csv(const fs::path& path) {
  ArtnessScores scores;
  for (const auto& row : parse_csv_table(read_text_file(path), {"id", "score"})) {
    scores[row[0]] = parse_double(row[1]);
  }
  return scores;
}

// File stem that is safe on any filesystem and unique per concept index.
std::string file_stem(std::size_t index, const std::string& id) {
  std::string out = std::to_string(index) + "_";
  for (char ch : id) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '-' || ch == '_' || ch == '.';
    out += ok ? ch : '_';
  }
  return out;
}

}  // namespace

Manifest load_manifest(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ManifestError("manifest " + path.string() + " is not valid JSON: " +
                        e.what());
  } catch (const FormatError& e) {
    throw ManifestError(e.what());
  }
  if (!doc.is_object()) throw ManifestError("manifest must be a JSON object");
  const fs::path base = path.parent_path();

  Manifest m;
  try {
    m.domain = parse_domain(required<std::string>(doc, "domain", "manifest"));
  } catch (const FormatError& e) {
    throw ManifestError(e.what());
  }
  if (doc.contains("sample_cap")) {
    m.sample_cap = required<std::uint64_t>(doc, "sample_cap", "manifest");
  }
  if (doc.contains("artness_threshold")) {
    m.artness_threshold = required<double>(doc, "artness_threshold", "manifest");
  }
  const auto concepts = required<json>(doc, "concepts", "manifest");
  if (!concepts.is_array()) throw ManifestError("manifest: 'concepts' must be an array");

  for (std::size_t i = 0; i < concepts.size(); ++i) {
    const auto& c = concepts[i];
    const std::string where = "manifest concept #" + std::to_string(i);
    ManifestConcept mc;
    mc.id = required<std::string>(c, "id", where);
    const std::string named = "concept '" + mc.id + "'";
    mc.name = c.contains("name") ? required<std::string>(c, "name", named) : mc.id;
    mc.caption_count = required<std::uint64_t>(c, "caption_count", named);
    mc.refs = resolve(base, required<std::string>(c, "refs", named));
    mc.candidates = resolve(base, required<std::string>(c, "candidates", named));
    require_file(mc.refs, mc.id, "reference");
    require_file(mc.candidates, mc.id, "candidate");
    if (!c.contains("generated") || !c["generated"].is_array() ||
        c["generated"].empty()) {
      throw ManifestError(named + ": no generated embedding files");
    }
    for (const auto& g : c["generated"]) {
      const auto prompt = required<std::string>(g, "prompt_id", named);
      const auto p = resolve(base, required<std::string>(g, "path", named));
      require_file(p, mc.id, "generated");
      mc.generated.emplace_back(prompt, p);
    }
    if (c.contains("artness_scores")) {
      const auto& a = c["artness_scores"];
      if (a.is_string()) {
        mc.artness_path = resolve(base, a.get<std::string>());
        require_file(*mc.artness_path, mc.id, "artness score");
      } else if (a.is_object()) {
        ArtnessScores scores;
        for (const auto& [key, value] : a.items()) {
          if (!value.is_number()) {
            throw ManifestError(named + ": artness score for '" + key +
                                "' is not a number");
          }
          scores[key] = value.get<double>();
        }
        mc.artness_inline = std::move(scores);
      } else {
        throw ManifestError(named + ": 'artness_scores' must be a path or an object");
      }
    }
    m.concepts.push_back(std::move(mc));
  }
  return m;
}

DomainData load_domain(const Manifest& manifest, std::size_t parallelism) {
  DomainData data;
  data.domain = manifest.domain;
  data.sample_cap = manifest.sample_cap;
  data.artness_threshold = manifest.artness_threshold;
  data.concepts.resize(manifest.concepts.size());
  parallel_for(manifest.concepts.size(), parallelism, [&](std::size_t i) {
    const auto& mc = manifest.concepts[i];
    auto& c = data.concepts[i];
    c.id = mc.id;
    c.name = mc.name;
    c.caption_count = mc.caption_count;
    c.refs = read_embedding_file(mc.refs);
    c.candidates = read_embedding_file(mc.candidates);
    for (const auto& [prompt, path] : mc.generated) {
      c.generated.push_back({prompt, read_embedding_file(path)});
    }
    if (mc.artness_path) c.artness_scores = read_artness_csv(*mc.artness_path);
    if (mc.artness_inline) c.artness_scores = mc.artness_inline;
  });
  return data;
}

fs::path write_domain(const DomainData& data, const fs::path& dir) {
  fs::create_directories(dir / "refs");
  fs::create_directories(dir / "candidates");
  fs::create_directories(dir / "generated");
  json doc;
  doc["domain"] = std::string(to_string(data.domain));
  if (data.sample_cap) doc["sample_cap"] = *data.sample_cap;
  if (data.artness_threshold) doc["artness_threshold"] = *data.artness_threshold;
  json concepts = json::array();
  for (std::size_t i = 0; i < data.concepts.size(); ++i) {
    const auto& c = data.concepts[i];
    const std::string stem = file_stem(i, c.id);
    json jc;
    jc["id"] = c.id;
    jc["name"] = c.name;
    jc["caption_count"] = c.caption_count;
    const std::string refs = "refs/" + stem + ".emb";
    const std::string cands = "candidates/" + stem + ".emb";
    write_embedding_file(c.refs, dir / refs);
    write_embedding_file(c.candidates, dir / cands);
    jc["refs"] = refs;
    jc["candidates"] = cands;
    json gen = json::array();
    for (const auto& g : c.generated) {
      const std::string p = "generated/" + stem + "__" + file_stem(gen.size(), g.prompt_id) + ".emb";
      write_embedding_file(g.embeddings, dir / p);
      gen.push_back({{"prompt_id", g.prompt_id}, {"path", p}});
    }
    jc["generated"] = gen;
    if (c.artness_scores) {
      fs::create_directories(dir / "artness");
      const std::string p = "artness/" + stem + ".csv";
      std::string csv = csv_row({"id", "score"});
      for (const auto& [id, score] : *c.artness_scores) {
        csv += csv_row({id, format_double(score)});
      }
      write_text_file(dir / p, csv);
      jc["artness_scores"] = p;
    }
    concepts.push_back(std::move(jc));
  }
  doc["concepts"] = std::move(concepts);
  const auto path = dir / "manifest.json";
  write_text_file(path, doc.dump(2) + "\n");
  return path;
}

}  // namespace imthresh
