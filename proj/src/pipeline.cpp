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

#include "imthresh/pipeline.hpp"

#include <map>

#include "imthresh/errors.hpp"
#include "imthresh/parallel.hpp"
#include "imthresh/report_io.hpp"
#include "imthresh/stats.hpp"
#include "imthresh/text_format.hpp"

namespace imthresh {
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kFilteredHeader = {"concept_id", "candidate_id",
                                                  "max_sim", "reason"};

// Rethrows any library error from `fn` with "[stage] " prepended.
template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  const std::string tag = std::string("[") + stage + "] ";
  try {
    return fn();
  } catch (const FormatError& e) {
    throw e.with_context(tag);
  } catch (const ManifestError& e) {
    throw ManifestError(tag + e.what());
  } catch (const UndefinedStatisticError& e) {
    throw UndefinedStatisticError(tag + e.what());
  } catch (const DomainError& e) {
    throw DomainError(tag + e.what());
  }
}

// Same error type, message prefixed with the concept.
template <typename Fn>
auto for_concept(const std::string& id, Fn&& fn) -> decltype(fn()) {
  const std::string tag = "concept '" + id + "': ";
  try {
    return fn();
  } catch (const FormatError& e) {
    throw e.with_context(tag);
  } catch (const ManifestError& e) {
    throw ManifestError(tag + e.what());
  } catch (const DomainError& e) {
    throw DomainError(tag + e.what());
  }
}

ScoreSeries series_of(const std::vector<ImitationRecord>& records) {
  std::vector<SeriesPoint> points;
  points.reserve(records.size());
  for (const auto& r : records) {
    points.push_back({r.concept_id, r.frequency, r.mean_score});
  }
  return ScoreSeries(std::move(points));
}

ChangePointResult detect_on(const ScoreSeries& series, std::optional<double> penalty) {
  const double pen = penalty ? *penalty : default_penalty(series);
  return pelt_detect(series, pen);
}

std::vector<std::pair<std::string, ScoreSeries>> prompt_series(
    const std::vector<ImitationRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<SeriesPoint>> by_prompt;
  for (const auto& r : records) {
    for (const auto& p : r.per_prompt_scores) {
      auto [it, inserted] = by_prompt.try_emplace(p.prompt_id);
      if (inserted) order.push_back(p.prompt_id);
      it->second.push_back({r.concept_id, r.frequency, p.score});
    }
  }
  std::vector<std::pair<std::string, ScoreSeries>> out;
  for (const auto& id : order) out.emplace_back(id, ScoreSeries(by_prompt[id]));
  return out;
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
}

ChangePointResult result_from_json(const ScoreSeries& series, const Json& j) {
  try {
    auto changes = j.at("change_indices").get<std::vector<std::size_t>>();
    for (std::size_t i = 0; i < changes.size(); ++i) {
      if (changes[i] == 0 || changes[i] >= series.size() ||
          (i > 0 && changes[i] <= changes[i - 1])) {
        throw FormatError("detection report: invalid change indices");
      }
    }
    return make_result(series, std::move(changes), j.at("penalty").get<double>());
  } catch (const Json::exception& e) {
    throw FormatError(std::string("detection report: ") + e.what());
  }
}

}  // namespace

std::uint64_t effective_sample_cap(const DomainData& data,
                                   const PipelineConfig& config) {
  if (config.sample_cap) return *config.sample_cap;
  if (data.sample_cap) return *data.sample_cap;
  return kDefaultSampleCap;
}

CalibratedThreshold calibrate_stage(const DomainData& data, ThresholdMethod method) {
  std::vector<EmbeddingMatrix> refs;
  refs.reserve(data.concepts.size());
  for (const auto& c : data.concepts) refs.push_back(c.refs);
  return fit_threshold(collect_pair_similarities(refs), method);
}

FilterStage filter_stage(const DomainData& data, const CalibratedThreshold& threshold,
                         std::uint64_t sample_cap,
                         std::optional<double> artness_threshold,
                         std::size_t parallelism) {
  const auto art_cut = artness_threshold ? artness_threshold : data.artness_threshold;
  FilterStage out;
  out.records.resize(data.concepts.size());
  out.results.resize(data.concepts.size());
  parallel_for(data.concepts.size(), parallelism, [&](std::size_t i) {
    const auto& c = data.concepts[i];
    for_concept(c.id, [&] {
      FilterResult result;
      if (c.artness_scores) {
        if (!art_cut) {
          throw ManifestError("artness scores given but no artness threshold");
        }
        result = two_stage_art_filter(c.candidates, *c.artness_scores, *art_cut,
                                      c.refs, threshold);
      } else {
        result = filter_candidates(c.candidates, c.refs, threshold);
      }
      ConceptRecord rec;
      rec.concept_id = c.id;
      rec.name = c.name;
      rec.domain = data.domain;
      rec.caption_count = c.caption_count;
      rec.retrieved_count = c.candidates.count();
      rec.positive_count = result.kept_count();
      rec.estimated_frequency = estimate_frequency(rec.caption_count,
                                                   rec.retrieved_count,
                                                   rec.positive_count, sample_cap)
                                    .value;
      out.records[i] = std::move(rec);
      out.results[i] = std::move(result);
    });
  });
  return out;
}

std::vector<ImitationRecord> score_stage(const DomainData& data,
                                         const FilterStage& filtered,
                                         std::size_t topk, std::size_t parallelism) {
  if (filtered.results.size() != data.concepts.size() ||
      filtered.records.size() != data.concepts.size()) {
    throw FormatError("filter results do not match the manifest's concepts");
  }
  std::vector<ImitationRecord> out(data.concepts.size());
  parallel_for(data.concepts.size(), parallelism, [&](std::size_t i) {
    const auto& c = data.concepts[i];
    for_concept(c.id, [&] {
      const auto& result = filtered.results[i];
      if (filtered.records[i].concept_id != c.id ||
          result.decisions.size() != c.candidates.count()) {
        throw FormatError("filter results do not match the candidate file");
      }
      for (std::size_t r = 0; r < c.candidates.count(); ++r) {
        if (result.decisions[r].id != c.candidates.id(r)) {
          throw FormatError("filter decision order does not match candidates");
        }
      }
      const auto rows = result.kept_rows();
      const EmbeddingMatrix training =
          rows.empty() ? c.refs : c.candidates.select_rows(rows);
      std::vector<PromptScore> scores;
      for (const auto& g : c.generated) {
        scores.push_back({g.prompt_id, imitation_score(g.embeddings, training, topk)});
      }
      out[i] = aggregate_prompts(std::move(scores),
                                 filtered.records[i].estimated_frequency, c.id);
    });
  });
  return out;
}

DetectionStage detect_stage(const std::vector<ImitationRecord>& records,
                            std::optional<double> penalty, bool per_prompt) {
  DetectionStage out;
  out.series = series_of(records);
  if (out.series.size() >= 1) out.isotonic = isotonic_fit(out.series);
  if (out.series.size() >= 2) out.result = detect_on(out.series, penalty);
  if (per_prompt) {
    for (auto& [prompt, series] : prompt_series(records)) {
      if (series.size() < 2) continue;
      auto result = detect_on(series, penalty);
      out.per_prompt.push_back({prompt, std::move(series), std::move(result)});
    }
  }
  return out;
}

std::vector<ValidationCheck> validation_checks(
    const std::vector<ImitationRecord>& records) {
  std::vector<ValidationCheck> out;
  if (records.size() < 2) return out;
  const auto inv = invariance_check(records, 10.0);
  ValidationCheck check;
  check.name = "distribution_invariance";
  check.value = inv.value;
  check.pass_threshold = kInvariancePassThreshold;
  check.passed = std::abs(inv.value) < kInvariancePassThreshold;
  check.notes = inv.empty ? "no concept pairs within 10 images of each other"
                          : std::to_string(inv.pair_count) +
                                " pairs with frequency difference < 10";
  out.push_back(std::move(check));
  return out;
}

ThresholdReport assemble_report(ConceptDomain domain, CalibratedThreshold calibration,
                                std::vector<ConceptRecord> concepts,
                                std::vector<ImitationRecord> imitation,
                                DetectionStage detection) {
  ThresholdReport report;
  report.domain = domain;
  report.calibration = calibration;
  report.validation = validation_checks(imitation);
  report.concepts = std::move(concepts);
  report.imitation = std::move(imitation);
  report.detection = std::move(detection);
  return report;
}

ThresholdReport run_pipeline(const DomainData& data, const PipelineConfig& config) {
  const auto calibration = in_stage("calibrate", [&] {
    return calibrate_stage(data, config.threshold_method);
  });
  auto filtered = in_stage("filter", [&] {
    return filter_stage(data, calibration, effective_sample_cap(data, config),
                        config.artness_threshold, config.parallelism);
  });
  auto imitation = in_stage("score", [&] {
    return score_stage(data, filtered, config.topk, config.parallelism);
  });
  auto detection = in_stage("detect", [&] {
    return detect_stage(imitation, config.penalty, config.per_prompt);
  });
  return assemble_report(data.domain, calibration, std::move(filtered.records),
                         std::move(imitation), std::move(detection));
}

std::string filtered_csv(const std::vector<ConceptRecord>& records,
                         const std::vector<FilterResult>& results) {
  std::string out = csv_row(kFilteredHeader);
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& d : results[i].decisions) {
      out += csv_row({records[i].concept_id, d.id, format_double(d.max_sim),
                      std::string(to_string(d.reason))});
    }
  }
  return out;
}

FilterStage parse_filter_stage(std::string_view filtered_csv_text,
                               std::string_view concepts_csv_text) {
  FilterStage out;
  out.records = parse_concept_table_csv(concepts_csv_text);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    index[out.records[i].concept_id] = i;
  }
  out.results.resize(out.records.size());
  for (const auto& row : parse_csv_table(filtered_csv_text, kFilteredHeader)) {
    const auto it = index.find(row[0]);
    if (it == index.end()) {
      throw FormatError("filtered.csv names unknown concept '" + row[0] + "'");
    }
    out.results[it->second].decisions.push_back(
        {row[1], parse_double(row[2]), parse_filter_reason(row[3])});
  }
  return out;
}

void run_calibrate_files(const DomainData& data, ThresholdMethod method,
                         const fs::path& dir) {
  const auto t = in_stage("calibrate", [&] { return calibrate_stage(data, method); });
  write_text_file(dir / stage_files::kCalibration, dump(calibration_json(t)));
}

void run_filter_files(const DomainData& data, std::uint64_t sample_cap,
                      std::optional<double> artness_threshold,
                      std::size_t parallelism, const fs::path& dir) {
  in_stage("filter", [&] {
    const auto t =
        parse_calibration_json(read_json(dir / stage_files::kCalibration));
    const auto f = filter_stage(data, t, sample_cap, artness_threshold, parallelism);
    write_text_file(dir / stage_files::kFiltered, filtered_csv(f.records, f.results));
    write_text_file(dir / stage_files::kConcepts, concept_table_csv(f.records));
  });
}

void run_score_files(const DomainData& data, std::size_t topk,
                     std::size_t parallelism, const fs::path& dir) {
  in_stage("score", [&] {
    const auto f = parse_filter_stage(read_text_file(dir / stage_files::kFiltered),
                                      read_text_file(dir / stage_files::kConcepts));
    const auto records = score_stage(data, f, topk, parallelism);
    write_text_file(dir / stage_files::kScores, prompt_scores_csv(records));
    write_text_file(dir / stage_files::kAggregated, aggregated_scores_csv(records));
  });
}

void run_detect_files(std::optional<double> penalty, bool per_prompt,
                      const fs::path& dir) {
  in_stage("detect", [&] {
    const auto records = parse_prompt_scores_csv(read_text_file(dir / stage_files::kScores));
    const auto d = detect_stage(records, penalty, per_prompt);
    write_text_file(dir / stage_files::kDetection, dump(detection_stage_json(d)));
  });
}

ThresholdReport run_report_files(const fs::path& dir) {
  return in_stage("report", [&] {
    const auto calibration =
        parse_calibration_json(read_json(dir / stage_files::kCalibration));
    auto concepts = parse_concept_table_csv(read_text_file(dir / stage_files::kConcepts));
    auto imitation =
        parse_prompt_scores_csv(read_text_file(dir / stage_files::kScores));
    const Json det = read_json(dir / stage_files::kDetection);

    DetectionStage detection;
    detection.series = series_of(imitation);
    if (detection.series.size() >= 1) detection.isotonic = isotonic_fit(detection.series);
    if (!det.is_null() && det.contains("change_indices")) {
      detection.result = result_from_json(detection.series, det);
    }
    if (det.is_object() && det.contains("per_prompt")) {
      auto series = prompt_series(imitation);
      std::map<std::string, const ScoreSeries*> by_prompt;
      for (const auto& [id, s] : series) by_prompt[id] = &s;
      for (const auto& p : det["per_prompt"]) {
        const auto id = p.at("prompt_id").get<std::string>();
        const auto it = by_prompt.find(id);
        if (it == by_prompt.end()) {
          throw FormatError("detection report names unknown prompt '" + id + "'");
        }
        detection.per_prompt.push_back(
            {id, *it->second, result_from_json(*it->second, p)});
      }
    }
    const ConceptDomain domain =
        concepts.empty() ? ConceptDomain::kFaces : concepts.front().domain;
    auto report = assemble_report(domain, calibration, std::move(concepts),
                                  std::move(imitation), std::move(detection));
    write_text_file(dir / stage_files::kReport, dump(report_json(report)));
    emit_plot_data(report, dir);
    return report;
  });
}

ThresholdReport run_pipeline(const PipelineConfig& config) {
  const auto manifest = in_stage("manifest", [&] { return load_manifest(config.manifest_path); });
  const auto data = in_stage("load", [&] { return load_domain(manifest, config.parallelism); });
  const auto& dir = config.output_dir;
  fs::create_directories(dir);
  run_calibrate_files(data, config.threshold_method, dir);
  run_filter_files(data, effective_sample_cap(data, config), config.artness_threshold,
                   config.parallelism, dir);
  run_score_files(data, config.topk, config.parallelism, dir);
  run_detect_files(config.penalty, config.per_prompt, dir);
  return run_report_files(dir);
}

}  // namespace imthresh
