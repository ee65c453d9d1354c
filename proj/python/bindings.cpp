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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "imthresh/calibration.hpp"
#include "imthresh/changepoint.hpp"
#include "imthresh/emb_io.hpp"
#include "imthresh/errors.hpp"
#include "imthresh/filtering.hpp"
#include "imthresh/pipeline.hpp"
#include "imthresh/report_io.hpp"
#include "imthresh/selection.hpp"
#include "imthresh/stats.hpp"
#include "imthresh/synthetic.hpp"

namespace py = pybind11;
using namespace imthresh;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Spans do not convert from Python sequences; take vectors instead.
template <auto Fn>
std::vector<std::size_t> vec_penalty(std::vector<double> y, double penalty) {
  return Fn(y, penalty);
}

py::dict calibrated_dict(const CalibratedThreshold& t) {
  py::dict d;
  d["method"] = std::string(to_string(t.method));
  d["value"] = t.value;
  d["tpr"] = t.tpr;
  d["fpr"] = t.fpr;
  d["f1"] = t.f1;
  d["n_same"] = t.n_same;
  d["n_diff"] = t.n_diff;
  return d;
}

py::tuple read_embeddings(const std::filesystem::path& path) {
  const auto m = read_embedding_file(path);
  FloatArray rows({m.count(), m.dim()});
  std::copy(m.data().begin(), m.data().end(), rows.mutable_data());
  return py::make_tuple(rows, m.ids());
}

void write_embeddings(const std::filesystem::path& path, FloatArray rows,
                      std::vector<std::string> ids) {
  if (rows.ndim() != 2) throw FormatError("embeddings must be a 2-D array");
  const auto* p = rows.data();
  std::vector<float> data(p, p + rows.size());
  write_embedding_file(
      EmbeddingMatrix(static_cast<std::size_t>(rows.shape(1)), std::move(data),
                      std::move(ids)),
      path);
}

py::dict select_subset(DoubleArray sim, std::size_t k) {
  if (sim.ndim() != 2 || sim.shape(0) != sim.shape(1)) {
    throw FormatError("similarity matrix must be square");
  }
  const auto n = static_cast<std::size_t>(sim.shape(0));
  std::vector<double> values(sim.data(), sim.data() + sim.size());
  const auto r = select_dense_subset(SelectionProblem(n, std::move(values), k));
  py::dict d;
  d["indices"] = r.indices;
  d["facility_location"] = r.facility_location;
  d["facility_location_bound"] = r.facility_location_bound;
  d["average_similarity"] = r.average_similarity;
  return d;
}

std::string pipeline_json(const std::filesystem::path& manifest,
                          const std::filesystem::path& output_dir,
                          const std::string& threshold_method, std::size_t topk,
                          std::optional<double> penalty,
                          std::optional<std::uint64_t> sample_cap,
                          std::optional<double> artness_threshold,
                          std::size_t parallelism, bool per_prompt) {
  PipelineConfig c;
  c.manifest_path = manifest;
  c.output_dir = output_dir;
  c.threshold_method = parse_threshold_method(threshold_method);
  c.topk = topk;
  c.penalty = penalty;
  c.sample_cap = sample_cap;
  c.artness_threshold = artness_threshold;
  c.parallelism = parallelism;
  c.per_prompt = per_prompt;
  py::gil_scoped_release release;
  return dump(report_json(run_pipeline(c)));
}

}  // namespace

PYBIND11_MODULE(_imthresh, m) {
  m.doc() = "Imitation threshold estimation core";

  static py::exception<Error> base(m, "ImthreshError");
  static py::exception<FormatError> format_error(m, "FormatError", base.ptr());
  static py::exception<DomainError> domain_error(m, "DomainError", base.ptr());
  static py::exception<UndefinedStatisticError> undefined_error(
      m, "UndefinedStatisticError", domain_error.ptr());
  static py::exception<ManifestError> manifest_error(m, "ManifestError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const UndefinedStatisticError& e) {
      py::set_error(undefined_error, e.what());
    } catch (const DomainError& e) {
      py::set_error(domain_error, e.what());
    } catch (const FormatError& e) {
      py::set_error(format_error, e.what());
    } catch (const ManifestError& e) {
      py::set_error(manifest_error, e.what());
    }
  });

  m.def("read_embeddings", &read_embeddings, py::arg("path"),
        "Returns (float32 rows, ids) from an .emb file.");
  m.def("write_embeddings", &write_embeddings, py::arg("path"), py::arg("rows"),
        py::arg("ids"));
  m.def(
      "cosine_similarity",
      [](std::vector<double> a, std::vector<double> b) {
        return cosine_similarity(std::span<const double>(a), std::span<const double>(b));
      },
      py::arg("a"), py::arg("b"));

  m.def("pelt_change_points", vec_penalty<&pelt_change_points>, py::arg("y"), py::arg("penalty"));
  m.def("exhaustive_change_points", vec_penalty<&exhaustive_change_points>, py::arg("y"),
        py::arg("penalty"));
  m.def("optimal_partition_change_points",
        vec_penalty<&optimal_partition_change_points>,
        py::arg("y"), py::arg("penalty"));
  m.def(
      "segmentation_objective",
      [](std::vector<double> y, std::vector<std::size_t> changes, double penalty) {
        return segmentation_objective(y, changes, penalty);
      }, py::arg("y"),
        py::arg("change_indices"), py::arg("penalty"));
  m.def(
      "default_penalty", [](std::vector<double> y) { return default_penalty(y); },
      py::arg("y"));

  m.def(
      "isotonic_fit", [](std::vector<double> y) { return isotonic_fit(y); }, py::arg("y"));
  m.def(
      "average_ranks", [](std::vector<double> x) { return average_ranks(x); }, py::arg("x"));
  m.def(
      "spearman", [](std::vector<double> x, std::vector<double> y) { return spearman(x, y); }, py::arg("x"), py::arg("y"));
  m.def(
      "threshold_agreement",
      [](std::vector<double> ratings, std::vector<double> frequencies, double threshold,
         const std::string& mode) {
        const auto input = make_agreement_input(ratings, frequencies, threshold);
        if (mode == "match") return threshold_agreement(input, AgreementMode::kMatch);
        if (mode == "dot") return threshold_agreement(input, AgreementMode::kDotProduct);
        throw DomainError("agreement mode must be 'match' or 'dot'");
      },
      py::arg("human_ratings"), py::arg("frequencies"), py::arg("threshold"),
      py::arg("mode") = "match");
  m.def(
      "caption_miss_rate",
      [](std::uint64_t total, std::uint64_t mention, double corpus, std::uint64_t sample) {
        const auto r = caption_miss_rate(total, mention, corpus, sample);
        return py::make_tuple(r.miss_fraction, r.extrapolated_missed);
      },
      py::arg("detected_total"), py::arg("detected_with_mention"), py::arg("corpus_size"),
      py::arg("sample_size") = kMissRateSampleSize);

  m.def(
      "fit_threshold",
      [](std::vector<double> same, std::vector<double> diff, const std::string& method) {
        return calibrated_dict(fit_threshold({std::move(same), std::move(diff)},
                                             parse_threshold_method(method)));
      },
      py::arg("same_pairs"), py::arg("diff_pairs"), py::arg("method") = "f1max");
  m.def(
      "estimate_frequency",
      [](std::uint64_t caption, std::uint64_t retrieved, std::uint64_t positive,
         std::uint64_t cap) {
        return estimate_frequency(caption, retrieved, positive, cap).value;
      },
      py::arg("caption_count"), py::arg("retrieved_count"), py::arg("positive_count"),
      py::arg("sample_cap") = kDefaultSampleCap);

  m.def("select_dense_subset", &select_subset, py::arg("similarity"), py::arg("k"));

  m.def(
      "generate_synthetic",
      [](const std::filesystem::path& out, std::size_t n_concepts, double planted_threshold,
         double noise_std, std::uint64_t seed) {
        SyntheticDomainSpec spec;
        spec.n_concepts = n_concepts;
        spec.planted_threshold = planted_threshold;
        spec.noise_std = noise_std;
        spec.seed = seed;
        return write_synthetic_domain(generate_domain(spec), out);
      },
      py::arg("output_dir"), py::arg("n_concepts") = 400,
      py::arg("planted_threshold") = 112.0, py::arg("noise_std") = 0.06,
      py::arg("seed") = 0, "Writes a synthetic domain and returns its manifest path.");

  m.def("run_pipeline_json", &pipeline_json, py::arg("manifest"), py::arg("output_dir"),
        py::arg("threshold_method") = "f1max", py::arg("topk") = kDefaultTopK,
        py::arg("penalty") = py::none(), py::arg("sample_cap") = py::none(),
        py::arg("artness_threshold") = py::none(), py::arg("parallelism") = 1,
        py::arg("per_prompt") = false);
}
