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

#include <cmath>
#include <random>

#include "imthresh/changepoint.hpp"
#include "imthresh/errors.hpp"
#include "oracles.hpp"

using namespace imthresh;

namespace {

ScoreSeries series(const std::vector<double>& y, std::vector<double> freq = {}) {
  std::vector<SeriesPoint> pts;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double f = freq.empty() ? static_cast<double>(i) : freq[i];
    pts.push_back({"c" + std::to_string(1000 + i), f, y[i]});
  }
  return ScoreSeries(std::move(pts));
}

using Cps = std::vector<std::size_t>;

}  // namespace

TEST_CASE("score series ordering and validation") {
  const auto s = series({0.1, 0.2, 0.3}, {30, 10, 10});
  CHECK(s[0].concept_id == "c1001");
  CHECK(s[1].concept_id == "c1002");
  CHECK(s.frequencies() == std::vector<double>{10, 10, 30});
  CHECK_THROWS_AS(series({0.1, NAN}), FormatError);
  CHECK_THROWS_AS(series({0.1, 0.2}, {1, -1}), FormatError);
}

TEST_CASE("worked segmentation examples") {
  const auto step = series({0, 0, 0, 5, 5, 5});
  const auto r = pelt_detect(step, 1.0);
  CHECK(r.change_indices == Cps{3});
  CHECK(r.segment_means == std::vector<double>{0, 5});
  CHECK(r.objective == doctest::Approx(1.0));
  CHECK(brute_force_segment(step, 1.0).change_indices == Cps{3});

  const auto flat = series({0.4, 0.4, 0.4, 0.4});
  CHECK(pelt_detect(flat, 1e-6).change_indices.empty());
  CHECK(brute_force_segment(flat, 1e-6).change_indices.empty());

  const auto bump = series({0, 0, 5, 5, 0, 0});
  CHECK(pelt_detect(bump, 0.1).change_indices == Cps{2, 4});
  CHECK(brute_force_segment(bump, 0.1).change_indices == Cps{2, 4});

  CHECK(pelt_detect(bump, 1e12).change_indices.empty());
  CHECK(brute_force_segment(bump, 1e12).change_indices.empty());
  CHECK_THROWS_AS(pelt_detect(series({1.0}), 1.0), DomainError);
  CHECK_THROWS_AS(brute_force_segment(series({1.0}), 1.0), DomainError);
}

TEST_CASE("PELT matches both oracles on random series") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 11;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = g(rng) + (i > n / 2 ? 2.0 : 0.0);
    const double penalty = 0.05 + 0.02 * trial;
    const auto got = pelt_change_points(y, penalty);
    CHECK(got == oracle::enumerate_segmentations(y, penalty));
    CHECK(got == oracle::dp_segmentation(y, penalty));
    CHECK(got == exhaustive_change_points(y, penalty));
    CHECK(segmentation_objective(y, got, penalty) ==
          doctest::Approx(oracle::objective(y, got, penalty)).epsilon(1e-12));
  }
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> y(400);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = g(rng) + static_cast<double>(i / 97);
    CHECK(pelt_change_points(y, 8.0) == oracle::dp_segmentation(y, 8.0));
    CHECK(pelt_change_points(y, 8.0) == optimal_partition_change_points(y, 8.0));
  }
}

TEST_CASE("imitation threshold is the frequency at the first change") {
  const auto s = series({0.1, 0.1, 0.1, 0.6, 0.6, 0.9, 0.9},
                        {1, 20, 60, 112, 200, 391, 700});
  const auto r = pelt_detect(s, 0.01);
  REQUIRE(r.change_indices == Cps{3, 5});
  CHECK(imitation_threshold(s, r) == 112.0);
  CHECK(r.change_frequencies == std::vector<double>{112, 391});
  CHECK(r.threshold_frequency == 112.0);
  const auto none = pelt_detect(series({0.2, 0.2, 0.2}), 1.0);
  CHECK_FALSE(imitation_threshold(series({0.2, 0.2, 0.2}), none).has_value());
}

TEST_CASE("default penalty") {
  CHECK(default_penalty(series({0.3, 0.3, 0.3, 0.3, 0.3})) == kPenaltyFloor);

  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> y(1000);
    for (auto& v : y) v = g(rng);
    mean += default_penalty(y) / 100.0;
  }
  CHECK(mean == doctest::Approx(2.0 * std::log(1000.0)).epsilon(0.3));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> y(50), scaled(50);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = g(rng);
    scaled[i] = 3.0 * y[i];
  }
  CHECK(default_penalty(scaled) == doctest::Approx(9.0 * default_penalty(y)).epsilon(1e-12));
  CHECK_THROWS_AS(default_penalty(std::vector<double>{1, 2, 3}), DomainError);
}
