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

#include <random>

#include "imthresh/embeddings.hpp"
#include "imthresh/errors.hpp"

using namespace imthresh;

namespace {

double cos2(std::vector<float> a, std::vector<float> b) { return cosine_similarity(a, b); }

EmbeddingMatrix random_matrix(std::size_t rows, std::size_t dim, std::mt19937_64& rng,
                              const std::string& tag) {
  std::normal_distribution<float> g(0.0F, 1.0F);
  std::vector<float> data(rows * dim);
  for (auto& x : data) x = g(rng);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < rows; ++i) ids.push_back(tag + std::to_string(i));
  return EmbeddingMatrix(dim, data, ids);
}

}  // namespace

TEST_CASE("cosine similarity on small vectors") {
  CHECK(cos2({1, 0}, {1, 0}) == 1.0);
  CHECK(cos2({1, 0}, {0, 1}) == 0.0);
  CHECK(cos2({3, 4}, {4, 3}) == doctest::Approx(0.96).epsilon(1e-15));
  CHECK(cos2({1, 1}, {-1, -1}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(cos2({1, 0}, {1, 0, 0}), FormatError);
  CHECK_THROWS_AS(cos2({0, 0}, {1, 0}), DomainError);
}

TEST_CASE("cosine similarity stays inside [-1, 1]") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-1e3F, 1e3F);
  for (int i = 0; i < 200; ++i) {
    std::vector<float> a(7);
    for (auto& x : a) x = u(rng);
    auto b = a;
    for (auto& x : b) x *= 3.0F;
    const double s = cos2(a, b);
    CHECK(s <= 1.0);
    CHECK(s >= 0.999999);
  }
}

TEST_CASE("matrix construction validates its invariants") {
  CHECK_THROWS_AS(EmbeddingMatrix(2, {1.0F, 2.0F, 3.0F}, {"a", "b"}), FormatError);
  CHECK_THROWS_AS(EmbeddingMatrix(1, {1.0F, 2.0F}, {"a", "a"}), FormatError);
  CHECK_THROWS_AS(EmbeddingMatrix(2, {0.0F, 0.0F}, {"a"}), FormatError);
  CHECK_THROWS_AS(EmbeddingMatrix(1, {std::nanf("")}, {"a"}), FormatError);
  const EmbeddingMatrix m(2, {1, 0, 0, 1, 1, 1}, {"x", "y", "z"});
  const std::vector<std::size_t> pick{2, 0};
  const auto s = m.select_rows(pick);
  CHECK(s.ids() == std::vector<std::string>{"z", "x"});
  CHECK(s.row(0)[1] == 1.0F);
  CHECK(m.concat(EmbeddingMatrix(2, {2, 2}, {"w"})).count() == 4);
  CHECK_THROWS_AS(m.concat(EmbeddingMatrix(2, {2, 2}, {"x"})), FormatError);
}

TEST_CASE("pairwise similarity equals the scalar loop bit for bit") {
  SUBCASE("orthonormal basis") {
    const EmbeddingMatrix e(2, {1, 0, 0, 1}, {"e1", "e2"});
    const auto s = pairwise_similarity(e, e);
    CHECK(s.values == std::vector<double>{1, 0, 0, 1});
  }
  SUBCASE("random 3x4 against 2x4, every parallelism") {
    std::mt19937_64 rng(5);
    const auto a = random_matrix(3, 4, rng, "a");
    const auto b = random_matrix(2, 4, rng, "b");
    for (std::size_t p : {1, 2, 8}) {
      const auto s = pairwise_similarity(a, b, p);
      REQUIRE(s.rows == 3);
      REQUIRE(s.cols == 2);
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
          CHECK(s(i, j) == cosine_similarity(a.row(i), b.row(j)));
        }
      }
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(pairwise_similarity(EmbeddingMatrix(2, {1, 0}, {"a"}),
                                        EmbeddingMatrix(3, {1, 0, 0}, {"b"})),
                    FormatError);
  }
}

TEST_CASE("max similarity to references") {
  const EmbeddingMatrix basis(2, {1, 0, 0, 1}, {"e1", "e2"});
  const std::vector<float> e1{1, 0}, e2{0, 1};
  CHECK(max_similarity_to_refs(e1, basis) == 1.0);
  CHECK(max_similarity_to_refs(e2, EmbeddingMatrix(2, {1, 0}, {"e1"})) == 0.0);
  const EmbeddingMatrix refs(2, {1.0F, 0.0F, 0.6F, 0.8F}, {"r0", "r1"});
  CHECK(max_similarity_to_refs(e2, refs) == doctest::Approx(0.8).epsilon(1e-7));
  CHECK_THROWS_AS(max_similarity_to_refs(e1, EmbeddingMatrix(2)), DomainError);
}

TEST_CASE("similarity to an axis") {
  const EmbeddingMatrix m(2, {1, 0, 0, 1, 1, 1}, {"x", "y", "z"});
  const std::vector<float> axis{1, 0};
  const auto s = similarity_to_axis(m, axis);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == doctest::Approx(std::sqrt(0.5)));
}
