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

#ifndef IMTHRESH_PIPELINE_HPP_
#define IMTHRESH_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "imthresh/calibration.hpp"
#include "imthresh/changepoint.hpp"
#include "imthresh/filtering.hpp"
#include "imthresh/manifest.hpp"
#include "imthresh/scoring.hpp"

namespace imthresh {

struct PipelineConfig {
  std::filesystem::path manifest_path;
  ThresholdMethod threshold_method = ThresholdMethod::kF1Max;
  std::size_t topk = kDefaultTopK;
  std::optional<double> penalty;              // default_penalty when unset
  std::optional<std::uint64_t> sample_cap;    // manifest value, then 100000
  std::optional<double> artness_threshold;    // manifest value when unset
  std::filesystem::path output_dir;
  std::size_t parallelism = 1;
  bool per_prompt = false;  // also run detection on each prompt's scores
};

// One entry of the validation section of a report.
struct ValidationCheck {
  std::string name;
  double value = 0.0;
  double pass_threshold = 0.0;
  bool passed = false;
  std::string notes;
};

// Largest average signed score difference between near-frequency concepts
// still treated as distribution invariant.
inline constexpr double kInvariancePassThreshold = 0.01;

struct PromptDetection {
  std::string prompt_id;
  ScoreSeries series;
  ChangePointResult result;
};

struct DetectionStage {
  ScoreSeries series;
  std::optional<ChangePointResult> result;  // unset when n < 2
  std::vector<double> isotonic;
  std::vector<PromptDetection> per_prompt;
};

struct FilterStage {
  std::vector<ConceptRecord> records;
  std::vector<FilterResult> results;
};

struct ThresholdReport {
  ConceptDomain domain = ConceptDomain::kFaces;
  CalibratedThreshold calibration;
  std::vector<ConceptRecord> concepts;
  std::vector<ImitationRecord> imitation;
  DetectionStage detection;
  std::vector<ValidationCheck> validation;
};

// Individual stages. All reductions are order-fixed, so results do not depend
// on `parallelism`.
CalibratedThreshold calibrate_stage(const DomainData& data, ThresholdMethod method);

FilterStage filter_stage(const DomainData& data, const CalibratedThreshold& threshold,
                         std::uint64_t sample_cap,
                         std::optional<double> artness_threshold,
                         std::size_t parallelism);

// Concepts with no kept candidates are scored against their references.
std::vector<ImitationRecord> score_stage(const DomainData& data,
                                         const FilterStage& filtered,
                                         std::size_t topk, std::size_t parallelism);

DetectionStage detect_stage(const std::vector<ImitationRecord>& records,
                            std::optional<double> penalty, bool per_prompt);

std::vector<ValidationCheck> validation_checks(
    const std::vector<ImitationRecord>& records);

ThresholdReport assemble_report(ConceptDomain domain, CalibratedThreshold calibration,
                                std::vector<ConceptRecord> concepts,
                                std::vector<ImitationRecord> imitation,
                                DetectionStage detection);

// Full in-memory run.
ThresholdReport run_pipeline(const DomainData& data, const PipelineConfig& config);

// Loads the manifest, runs every stage, persists all intermediates and the
// report under config.output_dir. Stage failures are rethrown with the stage
// name prefixed to the message.
ThresholdReport run_pipeline(const PipelineConfig& config);

// Persisted stage outputs under an output directory.
namespace stage_files {
inline constexpr const char* kCalibration = "calibration.json";
inline constexpr const char* kFiltered = "filtered.csv";
inline constexpr const char* kConcepts = "concepts.csv";
inline constexpr const char* kScores = "scores.csv";
inline constexpr const char* kAggregated = "scores_aggregated.csv";
inline constexpr const char* kDetection = "detection.json";
inline constexpr const char* kReport = "report.json";
inline constexpr const char* kPlotSeries = "plot_series.csv";
inline constexpr const char* kPlotChanges = "plot_changepoints.csv";
}  // namespace stage_files

// File-level stage runners used by the CLI; each reads its inputs from, and
// writes its outputs to, `dir`.
void run_calibrate_files(const DomainData& data, ThresholdMethod method,
                         const std::filesystem::path& dir);
void run_filter_files(const DomainData& data, std::uint64_t sample_cap,
                      std::optional<double> artness_threshold,
                      std::size_t parallelism, const std::filesystem::path& dir);
void run_score_files(const DomainData& data, std::size_t topk,
                     std::size_t parallelism, const std::filesystem::path& dir);
void run_detect_files(std::optional<double> penalty, bool per_prompt,
                      const std::filesystem::path& dir);
// Rebuilds report.json and the plot files from persisted intermediates.
ThresholdReport run_report_files(const std::filesystem::path& dir);

std::uint64_t effective_sample_cap(const DomainData& data,
                                   const PipelineConfig& config);

// Filter decisions CSV: concept_id,candidate_id,max_sim,reason
std::string filtered_csv(const std::vector<ConceptRecord>& records,
                         const std::vector<FilterResult>& results);
FilterStage parse_filter_stage(std::string_view filtered_csv_text,
                               std::string_view concepts_csv_text);

}  // namespace imthresh

#endif  // IMTHRESH_PIPELINE_HPP_
