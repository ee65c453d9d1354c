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

// Command line front end: one subcommand per pipeline stage plus the
// synthetic generator, validation statistics and reference selection.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "imthresh/emb_io.hpp"
#include "imthresh/errors.hpp"
#include "imthresh/manifest.hpp"
#include "imthresh/pipeline.hpp"
#include "imthresh/report_io.hpp"
#include "imthresh/selection.hpp"
#include "imthresh/stats.hpp"
#include "imthresh/synthetic.hpp"
#include "imthresh/text_format.hpp"

namespace fs = std::filesystem;
using namespace imthresh;

namespace {

struct CommonOptions {
  std::string manifest;
  std::string out = "imthresh-out";
  std::string method = "f1max";
  std::size_t topk = kDefaultTopK;
  std::optional<double> penalty;
  std::optional<std::uint64_t> sample_cap;
  std::optional<double> artness_threshold;
  std::size_t parallelism = 1;
  bool per_prompt = false;
};

void emit(const Json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << dump(doc);
  } else {
    write_text_file(out_path, dump(doc));
  }
}

PipelineConfig to_config(const CommonOptions& o) {
  PipelineConfig c;
  c.manifest_path = o.manifest;
  c.threshold_method = parse_threshold_method(o.method);
  c.topk = o.topk;
  c.penalty = o.penalty;
  c.sample_cap = o.sample_cap;
  c.artness_threshold = o.artness_threshold;
  c.output_dir = o.out;
  c.parallelism = o.parallelism;
  c.per_prompt = o.per_prompt;
  if (c.topk < 1) throw ManifestError("--topk must be at least 1");
  if (c.parallelism < 1) throw ManifestError("--parallelism must be at least 1");
  return c;
}

DomainData load(const CommonOptions& o) {
  return load_domain(load_manifest(o.manifest), o.parallelism);
}

Json check_json(const std::string& name, double value, double pass_threshold,
                bool passed, const std::string& notes) {
  return validation_json({name, value, pass_threshold, passed, notes});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Imitation threshold estimation from embedding files"};
  app.require_subcommand(1);
  CommonOptions opt;

  auto add_manifest = [&](CLI::App* sub) {
    sub->add_option("--manifest", opt.manifest, "Concept manifest (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out,--output-dir", opt.out, "Stage output directory");
  };
  auto add_parallelism = [&](CLI::App* sub) {
    sub->add_option("--parallelism", opt.parallelism, "Worker threads");
  };

  auto* calibrate = app.add_subcommand("calibrate", "Fit the similarity cutoff");
  add_manifest(calibrate);
  add_out(calibrate);
  calibrate->add_option("--threshold-method,--method", opt.method, "f1max or midpoint");

  auto* filter = app.add_subcommand("filter", "Filter candidates, estimate frequencies");
  add_manifest(filter);
  add_out(filter);
  add_parallelism(filter);
  filter->add_option("--sample-cap", opt.sample_cap, "Caption count above which counts are extrapolated");
  filter->add_option("--artness-threshold", opt.artness_threshold, "Stage-1 art cutoff");

  auto* score = app.add_subcommand("score", "Compute imitation scores");
  add_manifest(score);
  add_out(score);
  add_parallelism(score);
  score->add_option("--topk", opt.topk, "Training images compared per concept");

  auto* detect = app.add_subcommand("detect", "Detect change points on the score series");
  add_out(detect);
  detect->add_option("--penalty", opt.penalty, "PELT penalty (default: robust BIC-style)");
  detect->add_flag("--per-prompt", opt.per_prompt, "Also detect on each prompt's scores");

  auto* report = app.add_subcommand("report", "Assemble report.json and plot data");
  add_out(report);

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage");
  add_manifest(pipeline);
  add_out(pipeline);
  add_parallelism(pipeline);
  pipeline->add_option("--threshold-method,--method", opt.method, "f1max or midpoint");
  pipeline->add_option("--topk", opt.topk, "Training images compared per concept");
  pipeline->add_option("--penalty", opt.penalty, "PELT penalty");
  pipeline->add_option("--sample-cap", opt.sample_cap, "Extrapolation cap");
  pipeline->add_option("--artness-threshold", opt.artness_threshold, "Stage-1 art cutoff");
  pipeline->add_flag("--per-prompt", opt.per_prompt, "Also detect per prompt");

  SyntheticDomainSpec spec;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic domain");
  add_out(synth);
  synth->add_option("--n-concepts", spec.n_concepts, "Number of concepts")->capture_default_str();
  synth->add_option("--dim", spec.dim, "Embedding dimension")->capture_default_str();
  synth->add_option("--freq-min", spec.freq_min, "Smallest concept frequency")->capture_default_str();
  synth->add_option("--freq-max", spec.freq_max, "Largest concept frequency")->capture_default_str();
  synth->add_option("--planted-threshold", spec.planted_threshold, "Frequency where scores jump")->capture_default_str();
  synth->add_option("--low-score", spec.low_score_mean, "Mean score below the threshold")->capture_default_str();
  synth->add_option("--high-score", spec.high_score_mean, "Mean score above the threshold")->capture_default_str();
  synth->add_option("--noise-std", spec.noise_std, "Score noise")->capture_default_str();
  synth->add_option("--refs", spec.refs_per_concept, "Reference images per concept")->capture_default_str();
  synth->add_option("--candidates", spec.candidates_per_concept, "Candidate training images per concept")->capture_default_str();
  synth->add_option("--generated", spec.generated_per_concept, "Generated images per prompt")->capture_default_str();
  synth->add_option("--prompts", spec.n_prompts, "Prompts per concept")->capture_default_str();
  synth->add_option("--contamination", spec.contamination_rate, "Fraction of off-concept candidates")->capture_default_str();
  synth->add_option("--seed", spec.seed, "Random seed")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Validation statistics");
  validate->require_subcommand(1);
  std::string json_out;
  validate->add_option("--json-out", json_out, "Write the report here instead of stdout");

  std::string scores_path;
  double delta = 10.0;
  double invariance_pass = kInvariancePassThreshold;
  auto* v_inv = validate->add_subcommand("invariance", "Near-frequency score differences");
  v_inv->add_option("--scores", scores_path, "scores_aggregated.csv")
      ->required()
      ->check(CLI::ExistingFile);
  v_inv->add_option("--delta", delta, "Frequency window");
  v_inv->add_option("--pass-threshold", invariance_pass, "Largest acceptable |mean difference|");

  std::uint64_t detected = 0, with_mention = 0;
  std::uint64_t sample_size = kMissRateSampleSize;
  double corpus = 0.0;
  double miss_pass = 0.001;
  auto* v_miss = validate->add_subcommand("miss-rate", "Caption occurrence miss rate");
  v_miss->add_option("--detected", detected, "Sampled images where the concept was detected")->required();
  v_miss->add_option("--with-mention", with_mention, "Detected images whose caption names the concept")->required();
  v_miss->add_option("--corpus", corpus, "Corpus size for extrapolation")->required();
  v_miss->add_option("--sample-size", sample_size, "Images sampled")->capture_default_str();
  v_miss->add_option("--pass-threshold", miss_pass, "Largest acceptable miss fraction");

  std::string groups_path;
  auto* v_fmr = validate->add_subcommand("fmr-tmr", "Face embedder audit");
  v_fmr->add_option("--groups", groups_path,
                    "JSON {groups: [{group_id, members: [{person_id, faces}]}]}")
      ->required()
      ->check(CLI::ExistingFile);

  std::string agreement_path;
  std::optional<double> agreement_threshold;
  std::string detection_path;
  std::string agreement_mode = "match";
  double agreement_pass = 0.5;
  auto* v_agree = validate->add_subcommand("agreement", "Human vs detected threshold agreement");
  v_agree->add_option("--input", agreement_path,
                      "CSV concept_id,human_rating,frequency")
      ->required()
      ->check(CLI::ExistingFile);
  v_agree->add_option("--threshold", agreement_threshold, "Imitation threshold");
  v_agree->add_option("--detection", detection_path, "detection.json supplying the threshold");
  v_agree->add_option("--mode", agreement_mode, "match or dot");
  v_agree->add_option("--pass-threshold", agreement_pass, "Smallest acceptable agreement");

  std::string spearman_path;
  auto* v_spear = validate->add_subcommand("spearman", "Rank correlation of two columns");
  v_spear->add_option("--input", spearman_path, "CSV with header x,y")
      ->required()
      ->check(CLI::ExistingFile);

  std::string emb_path, sim_path;
  std::size_t select_k = 10;
  auto* select = app.add_subcommand("select-refs", "Pick a homogeneous reference subset");
  auto* emb_opt = select->add_option("--emb", emb_path, ".emb file of candidate references");
  select->add_option("--sim", sim_path, "Square similarity CSV (no header)")
      ->excludes(emb_opt);
  select->add_option("--k", select_k, "Subset size");
  select->add_option("--json-out", json_out, "Write the selection here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*calibrate) {
      run_calibrate_files(load(opt), parse_threshold_method(opt.method), opt.out);
    } else if (*filter) {
      const auto data = load(opt);
      run_filter_files(data, effective_sample_cap(data, to_config(opt)),
                       opt.artness_threshold, opt.parallelism, opt.out);
    } else if (*score) {
      const auto config = to_config(opt);
      run_score_files(load(opt), config.topk, config.parallelism, opt.out);
    } else if (*detect) {
      run_detect_files(opt.penalty, opt.per_prompt, opt.out);
    } else if (*report) {
      run_report_files(opt.out);
    } else if (*pipeline) {
      const auto r = run_pipeline(to_config(opt));
      const auto& det = r.detection.result;
      if (det && det->threshold_frequency) {
        std::cout << "imitation threshold: " << format_double(*det->threshold_frequency)
                  << "\n";
      } else {
        std::cout << "imitation threshold: none detected\n";
      }
    } else if (*synth) {
      const auto domain = generate_domain(spec);
      const auto manifest = write_synthetic_domain(domain, opt.out);
      std::cout << manifest.string() << "\n";
    } else if (*v_inv) {
      const auto records = parse_aggregated_scores_csv(read_text_file(scores_path));
      const auto r = invariance_check(records, delta);
      emit(check_json("distribution_invariance", r.value, invariance_pass,
                      std::abs(r.value) < invariance_pass,
                      r.empty ? "no qualifying pairs"
                              : std::to_string(r.pair_count) + " pairs, standard error " +
                                    format_double(r.standard_error)),
           json_out);
    } else if (*v_miss) {
      const auto r = caption_miss_rate(detected, with_mention, corpus, sample_size);
      emit(check_json("caption_miss_rate", r.miss_fraction, miss_pass,
                      r.miss_fraction <= miss_pass,
                      "extrapolated missed images: " + format_double(r.extrapolated_missed)),
           json_out);
    } else if (*v_fmr) {
      const auto doc = Json::parse(read_text_file(groups_path));
      const fs::path base = fs::path(groups_path).parent_path();
      std::vector<DemographicGroup> groups;
      for (const auto& g : doc.at("groups")) {
        DemographicGroup group{g.at("group_id").get<std::string>(), {}};
        for (const auto& m : g.at("members")) {
          fs::path p = m.at("faces").get<std::string>();
          if (p.is_relative()) p = base / p;
          group.members.push_back({m.at("person_id").get<std::string>(),
                                   read_embedding_file(p)});
        }
        groups.push_back(std::move(group));
      }
      Json out = Json::array();
      for (const auto& r : fmr_tmr(groups)) {
        out.push_back(check_json("fmr_tmr:" + r.group_id, r.fmr, r.tmr, r.fmr < r.tmr,
                                 "value is FMR, pass_threshold is TMR"));
      }
      emit(out, json_out);
    } else if (*v_agree) {
      double threshold = 0.0;
      if (agreement_threshold) {
        threshold = *agreement_threshold;
      } else if (!detection_path.empty()) {
        const auto det = Json::parse(read_text_file(detection_path));
        if (det.is_null() || det.at("threshold_frequency").is_null()) {
          throw DomainError("detection report has no imitation threshold");
        }
        threshold = det.at("threshold_frequency").get<double>();
      } else {
        throw ManifestError("agreement needs --threshold or --detection");
      }
      std::vector<double> ratings, freqs;
      for (const auto& row : parse_csv_table(read_text_file(agreement_path),
                                             {"concept_id", "human_rating", "frequency"})) {
        ratings.push_back(parse_double(row[1]));
        freqs.push_back(parse_double(row[2]));
      }
      const auto mode = agreement_mode == "dot" ? AgreementMode::kDotProduct
                                                : AgreementMode::kMatch;
      const double value =
          threshold_agreement(make_agreement_input(ratings, freqs, threshold), mode);
      emit(check_json("threshold_agreement", value, agreement_pass,
                      value >= agreement_pass,
                      std::to_string(ratings.size()) + " concepts, mode " + agreement_mode),
           json_out);
    } else if (*v_spear) {
      std::vector<double> x, y;
      for (const auto& row : parse_csv_table(read_text_file(spearman_path), {"x", "y"})) {
        x.push_back(parse_double(row[0]));
        y.push_back(parse_double(row[1]));
      }
      const double rho = spearman(x, y);
      emit(check_json("spearman", rho, 0.0, rho > 0.0, std::to_string(x.size()) + " pairs"),
           json_out);
    } else if (*select) {
      std::optional<EmbeddingMatrix> emb;
      std::optional<SelectionProblem> problem;
      if (!emb_path.empty()) {
        emb = read_embedding_file(emb_path);
        problem.emplace(SelectionProblem::from_embeddings(*emb, select_k));
      } else if (!sim_path.empty()) {
        std::size_t n = 0;
        auto values = parse_similarity_csv(read_text_file(sim_path), n);
        problem.emplace(n, std::move(values), select_k);
      } else {
        throw ManifestError("select-refs needs --emb or --sim");
      }
      const auto r = select_dense_subset(*problem);
      Json out;
      out["k"] = select_k;
      out["selected_indices"] = r.indices;
      if (emb) {
        Json ids = Json::array();
        for (auto i : r.indices) ids.push_back(emb->id(i));
        out["selected_ids"] = std::move(ids);
      }
      out["facility_location"] = r.facility_location;
      out["facility_location_bound"] = r.facility_location_bound;
      out["average_similarity"] = r.average_similarity;
      emit(out, json_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid JSON input: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kFormat);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kConfig);
  }
  return 0;
}
