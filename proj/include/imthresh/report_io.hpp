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

#ifndef IMTHRESH_REPORT_IO_HPP_
#define IMTHRESH_REPORT_IO_HPP_

#include <string>
#include <string_view>

#include <json.hpp>

#include "imthresh/calibration.hpp"
#include "imthresh/changepoint.hpp"
#include "imthresh/pipeline.hpp"
#include "imthresh/selection.hpp"

namespace imthresh {

using Json = nlohmann::ordered_json;

// {method, value, tpr, fpr, f1, n_same, n_diff}
Json calibration_json(const CalibratedThreshold& t);
CalibratedThreshold parse_calibration_json(const Json& doc);

// {penalty, change_indices, change_frequencies, segment_means,
//  threshold_frequency, ...}
Json detection_json(const ChangePointResult& r);
// Detection stage file: the main result plus optional per-prompt results.
Json detection_stage_json(const DetectionStage& d);

// {name, value, pass_threshold, passed, notes}
Json validation_json(const ValidationCheck& check);

Json report_json(const ThresholdReport& report);

// Plot data: sorted rows (index, concept_id, frequency, mean_score, variance,
// isotonic_fit) and change-point annotations (change_index, frequency,
// mean_before, mean_after).
std::string plot_series_csv(const ThresholdReport& report);
std::string plot_changepoints_csv(const ThresholdReport& report);

// Writes plot_series.csv and plot_changepoints.csv into `dir`.
void emit_plot_data(const ThresholdReport& report, const std::filesystem::path& dir);

// Pretty-printed with a trailing newline.
std::string dump(const Json& doc);

}  // namespace imthresh

#endif  // IMTHRESH_REPORT_IO_HPP_
