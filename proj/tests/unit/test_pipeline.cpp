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

#include <filesystem>
#include <json.hpp>

#include "imthresh/errors.hpp"
#include "imthresh/pipeline.hpp"
#include "imthresh/report_io.hpp"
#include "imthresh/synthetic.hpp"
#include "imthresh/text_format.hpp"

namespace fs = std::filesystem;
using namespace imthresh;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "imthresh_unit_pipeline" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SyntheticDomainSpec small_spec() {
  SyntheticDomainSpec spec;
  spec.n_concepts = 60;
  spec.freq_max = 5000;
  spec.planted_threshold = 112;
  return spec;
}

PipelineConfig config_for(const fs::path& manifest, const fs::path& out) {
  PipelineConfig c;
  c.manifest_path = manifest;
  c.output_dir = out;
  return c;
}

}  // namespace

TEST_CASE("synthetic domains") {
  SUBCASE("deterministic in the seed") {
    const auto a = generate_domain(small_spec());
    const auto b = generate_domain(small_spec());
    CHECK(truth_json(a.truth) == truth_json(b.truth));
    CHECK(a.data.concepts[7].candidates == b.data.concepts[7].candidates);
  }
  SUBCASE("no contamination keeps every candidate") {
    auto spec = small_spec();
    spec.contamination_rate = 0.0;
    const auto d = generate_domain(spec);
    const auto t = calibrate_stage(d.data, ThresholdMethod::kF1Max);
    const auto f = filter_stage(d.data, t, 0, std::nullopt, 2);
    for (std::size_t i = 0; i < d.data.concepts.size(); ++i) {
      CHECK(f.results[i].kept_count() == d.data.concepts[i].candidates.count());
    }
  }
  SUBCASE("estimated frequencies reproduce the planted ones") {
    const auto d = generate_domain(small_spec());
    const auto t = calibrate_stage(d.data, ThresholdMethod::kF1Max);
    const auto f = filter_stage(d.data, t, *d.data.sample_cap, std::nullopt, 1);
    for (std::size_t i = 0; i < f.records.size(); ++i) {
      CHECK(f.records[i].estimated_frequency == d.truth.per_concept[i].frequency);
    }
    CHECK(d.truth.planted_frequency == 112.0);
  }
  SUBCASE("too few dimensions for the geometry") {
    auto spec = small_spec();
    spec.dim = 8;
    CHECK_THROWS_AS(generate_domain(spec), DomainError);
  }
}

TEST_CASE("alias pairs conserve counts and scores") {
  auto spec = small_spec();
  spec.candidates_per_concept = 200;
  spec.contamination_rate = 0.0;
  spec.n_concepts = 4;
  const auto pair = generate_alias_pair(spec, 0.5);
  CHECK(pair.first_record.positive_count == 100);
  CHECK(pair.second_record.positive_count == 100);
  const std::vector<ConceptRecord> both{pair.first_record, pair.second_record};
  CHECK(merge_aliases(both).positive_count == 200);
  CHECK(pair.ground_truth_count == 200);

  const auto& gen = pair.full.generated.front().embeddings;
  const auto merged_pool = pair.first.candidates.concat(pair.second.candidates);
  CHECK(imitation_score(gen, merged_pool) == imitation_score(gen, pair.full.candidates));

  const auto skewed = generate_alias_pair(spec, 172.0 / 12349.0);
  CHECK(skewed.first_record.positive_count == 3);
  CHECK(skewed.first_record.positive_count + skewed.second_record.positive_count == 200);
}

TEST_CASE("manifest validation") {
  const auto dir = scratch("manifest");
  const auto manifest = write_synthetic_domain(generate_domain(small_spec()), dir);
  const auto m = load_manifest(manifest);
  CHECK(m.concepts.size() == 60);
  CHECK(m.domain == ConceptDomain::kSynthetic);

  SUBCASE("missing generated file names the concept") {
    const auto victim = m.concepts[5].generated.front().second;
    fs::remove(victim);
    try {
      load_manifest(manifest);
      FAIL("expected ManifestError");
    } catch (const ManifestError& e) {
      CHECK(std::string(e.what()).find(m.concepts[5].id) != std::string::npos);
    }
    const auto out = scratch("manifest_out");
    CHECK_THROWS_AS(run_pipeline(config_for(manifest, out)), ManifestError);
  }
  SUBCASE("schema errors") {
    write_text_file(dir / "bad.json", "{\"domain\": \"faces\"}");
    CHECK_THROWS_AS(load_manifest(dir / "bad.json"), ManifestError);
    write_text_file(dir / "bad2.json", "{\"domain\": \"oil\", \"concepts\": []}");
    CHECK_THROWS_AS(load_manifest(dir / "bad2.json"), ManifestError);
    write_text_file(dir / "bad3.json", "not json");
    CHECK_THROWS_AS(load_manifest(dir / "bad3.json"), ManifestError);
  }
}

TEST_CASE("noiseless synthetic run recovers the planted threshold") {
  auto spec = small_spec();
  spec.noise_std = 0.0;
  const auto d = generate_domain(spec);
  const auto report = run_pipeline(d.data, PipelineConfig{});
  REQUIRE(report.detection.result.has_value());
  CHECK(report.detection.result->threshold_frequency == 112.0);
  CHECK(report.detection.result->change_indices.front() == d.truth.planted_index);
  CHECK(report.concepts.size() == 60);
  CHECK(report.imitation.size() == 60);
  CHECK(report.detection.isotonic.size() == 60);
  CHECK_FALSE(report.validation.empty());
}

TEST_CASE("persisted stages reproduce the report byte for byte") {
  const auto dir = scratch("rerun");
  const auto manifest = write_synthetic_domain(generate_domain(small_spec()), dir / "domain");
  auto config = config_for(manifest, dir / "out");
  config.per_prompt = true;
  run_pipeline(config);
  const auto report = read_text_file(dir / "out" / stage_files::kReport);
  const auto plot = read_text_file(dir / "out" / stage_files::kPlotSeries);

  run_report_files(dir / "out");
  CHECK(read_text_file(dir / "out" / stage_files::kReport) == report);
  run_detect_files(std::nullopt, true, dir / "out");
  run_report_files(dir / "out");
  CHECK(read_text_file(dir / "out" / stage_files::kReport) == report);
  const auto data = load_domain(load_manifest(manifest));
  run_score_files(data, kDefaultTopK, 3, dir / "out");
  run_detect_files(std::nullopt, true, dir / "out");
  run_report_files(dir / "out");
  CHECK(read_text_file(dir / "out" / stage_files::kReport) == report);
  CHECK(read_text_file(dir / "out" / stage_files::kPlotSeries) == plot);

  const auto doc = nlohmann::json::parse(report);
  CHECK(doc.at("imitation_threshold").is_number());
  CHECK(doc.at("series").size() == 60);
  CHECK(doc.at("per_prompt_detection").size() == small_spec().n_prompts);
}

TEST_CASE("stage errors carry the stage name") {
  const auto dir = scratch("stage_error");
  try {
    run_detect_files(std::nullopt, false, dir);
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).rfind("[detect] ", 0) == 0);
  }
}

TEST_CASE("plot data") {
  SUBCASE("single concept") {
    std::vector<ImitationRecord> one{aggregate_prompts({{"p0", 0.3}}, 5.0, "solo")};
    auto detection = detect_stage(one, std::nullopt, false);
    CHECK_FALSE(detection.result.has_value());
    const auto report =
        assemble_report(ConceptDomain::kFaces, {}, {}, one, std::move(detection));
    const auto rows = parse_csv(plot_series_csv(report));
    CHECK(rows.size() == 2);
    CHECK(parse_csv(plot_changepoints_csv(report)).size() == 1);
  }
  SUBCASE("annotations agree with the series rows") {
    auto spec = small_spec();
    spec.n_concepts = 400;
    spec.freq_max = 100000;
    const auto report = run_pipeline(generate_domain(spec).data, PipelineConfig{});
    const auto series = parse_csv_table(
        plot_series_csv(report),
        {"index", "concept_id", "frequency", "mean_score", "variance", "isotonic_fit"});
    CHECK(series.size() == 400);
    const auto changes = parse_csv_table(plot_changepoints_csv(report),
                                         {"change_index", "frequency", "mean_before",
                                          "mean_after"});
    const auto& r = *report.detection.result;
    REQUIRE(changes.size() == r.change_indices.size());
    std::vector<std::size_t> bounds{0};
    for (const auto& row : changes) bounds.push_back(parse_u64(row[0]));
    bounds.push_back(series.size());
    for (std::size_t c = 0; c < changes.size(); ++c) {
      auto mean_of = [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += parse_double(series[i][3]);
        return s / static_cast<double>(hi - lo);
      };
      CHECK(parse_double(changes[c][2]) == doctest::Approx(mean_of(bounds[c], bounds[c + 1])));
      CHECK(parse_double(changes[c][3]) == doctest::Approx(mean_of(bounds[c + 1], bounds[c + 2])));
      CHECK(parse_double(changes[c][1]) == r.change_frequencies[c]);
    }
  }
}
