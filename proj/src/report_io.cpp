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

#include "imthresh/report_io.hpp"

#include "imthresh/errors.hpp"
#include "imthresh/stats.hpp"
#include "imthresh/text_format.hpp"

namespace imthresh {
namespace {

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

Json calibration_json(const CalibratedThreshold& t) {
  Json j;
  j["method"] = std::string(to_string(t.method));
  j["value"] = t.value;
  j["tpr"] = t.tpr;
  j["fpr"] = t.fpr;
  j["f1"] = t.f1;
  j["n_same"] = t.n_same;
  j["n_diff"] = t.n_diff;
  return j;
}

CalibratedThreshold parse_calibration_json(const Json& doc) {
  try {
    CalibratedThreshold t;
    t.method = parse_threshold_method(doc.at("method").get<std::string>());
    t.value = doc.at("value").get<double>();
    t.tpr = doc.at("tpr").get<double>();
    t.fpr = doc.at("fpr").get<double>();
    t.f1 = doc.at("f1").get<double>();
    t.n_same = doc.at("n_same").get<std::size_t>();
    t.n_diff = doc.at("n_diff").get<std::size_t>();
    return t;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("calibration report: ") + e.what());
  }
}

Json detection_json(const ChangePointResult& r) {
  Json j;
  j["penalty"] = r.penalty;
  j["change_indices"] = r.change_indices;
  j["change_frequencies"] = r.change_frequencies;
  j["segment_means"] = r.segment_means;
  j["threshold_frequency"] = optional_number(r.threshold_frequency);
  j["cost_model"] = r.cost_model;
  j["objective"] = r.objective;
  j["series_length"] = r.series_length;
  return j;
}

Json detection_stage_json(const DetectionStage& d) {
  Json j = d.result ? detection_json(*d.result) : Json(nullptr);
  if (!d.per_prompt.empty()) {
    Json per = Json::array();
    for (const auto& p : d.per_prompt) {
      Json e = detection_json(p.result);
      e["prompt_id"] = p.prompt_id;
      per.push_back(std::move(e));
    }
    if (j.is_null()) j = Json::object();
    j["per_prompt"] = std::move(per);
  }
  return j;
}

Json validation_json(const ValidationCheck& check) {
  Json j;
  j["name"] = check.name;
  j["value"] = check.value;
  j["pass_threshold"] = check.pass_threshold;
  j["passed"] = check.passed;
  j["notes"] = check.notes;
  return j;
}

Json report_json(const ThresholdReport& report) {
  Json j;
  j["domain"] = std::string(to_string(report.domain));
  j["calibration"] = calibration_json(report.calibration);

  Json concepts = Json::array();
  for (std::size_t i = 0; i < report.concepts.size(); ++i) {
    const auto& c = report.concepts[i];
    Json e;
    e["concept_id"] = c.concept_id;
    e["name"] = c.name;
    e["caption_count"] = c.caption_count;
    e["retrieved_count"] = c.retrieved_count;
    e["positive_count"] = c.positive_count;
    e["estimated_frequency"] = c.estimated_frequency;
    e["aliases"] = c.aliases;
    e["training_source"] = c.positive_count == 0 ? "references" : "filtered";
    if (i < report.imitation.size()) {
      const auto& im = report.imitation[i];
      e["mean_score"] = im.mean_score;
      e["variance"] = im.variance;
      Json prompts = Json::array();
      for (const auto& p : im.per_prompt_scores) {
        prompts.push_back({{"prompt_id", p.prompt_id}, {"score", p.score}});
      }
      e["per_prompt_scores"] = std::move(prompts);
    }
    concepts.push_back(std::move(e));
  }
  j["concepts"] = std::move(concepts);

  Json series = Json::array();
  const auto& s = report.detection.series;
  for (std::size_t i = 0; i < s.size(); ++i) {
    series.push_back({{"index", i},
                      {"concept_id", s[i].concept_id},
                      {"frequency", s[i].frequency},
                      {"score", s[i].score}});
  }
  j["series"] = std::move(series);
  const auto& det = report.detection.result;
  j["detection"] = det ? detection_json(*det) : Json(nullptr);
  j["imitation_threshold"] =
      det ? optional_number(det->threshold_frequency) : Json(nullptr);
  if (!report.detection.per_prompt.empty()) {
    j["per_prompt_detection"] = detection_stage_json(report.detection)["per_prompt"];
  }
  j["isotonic_fit"] = report.detection.isotonic;
  Json validation = Json::array();
  for (const auto& v : report.validation) validation.push_back(validation_json(v));
  j["validation"] = std::move(validation);
  return j;
}

std::string plot_series_csv(const ThresholdReport& report) {
  const auto& series = report.detection.series;
  std::map<std::string, const ImitationRecord*> by_id;
  for (const auto& r : report.imitation) by_id[r.concept_id] = &r;
  std::string out = csv_row({"index", "concept_id", "frequency", "mean_score",
                             "variance", "isotonic_fit"});
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto it = by_id.find(series[i].concept_id);
    const double variance = it == by_id.end() ? 0.0 : it->second->variance;
    const double fit = i < report.detection.isotonic.size()
                           ? report.detection.isotonic[i]
                           : series[i].score;
    out += csv_row({std::to_string(i), series[i].concept_id,
                    format_double(series[i].frequency),
                    format_double(series[i].score), format_double(variance),
                    format_double(fit)});
  }
  return out;
}

std::string plot_changepoints_csv(const ThresholdReport& report) {
  std::string out =
      csv_row({"change_index", "frequency", "mean_before", "mean_after"});
  const auto& det = report.detection.result;
  if (!det) return out;
  for (std::size_t c = 0; c < det->change_indices.size(); ++c) {
    out += csv_row({std::to_string(det->change_indices[c]),
                    format_double(det->change_frequencies[c]),
                    format_double(det->segment_means[c]),
                    format_double(det->segment_means[c + 1])});
  }
  return out;
}

void emit_plot_data(const ThresholdReport& report,
                    const std::filesystem::path& dir) {
  write_text_file(dir / stage_files::kPlotSeries, plot_series_csv(report));
  write_text_file(dir / stage_files::kPlotChanges, plot_changepoints_csv(report));
}

}  // namespace imthresh
