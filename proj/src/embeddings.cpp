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

#include "imthresh/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "imthresh/errors.hpp"
#include "imthresh/parallel.hpp"

namespace imthresh {
namespace {

template <typename T>
double squared_norm(std::span<const T> v) {
  double acc = 0.0;
  for (T x : v) acc += static_cast<double>(x) * static_cast<double>(x);
  return acc;
}

template <typename T>
double dot(std::span<const T> a, std::span<const T> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

// Shared by the scalar and bulk kernels so both round identically.
double finish_cosine(double dot_ab, double sq_a, double sq_b) {
  const double value = dot_ab / (std::sqrt(sq_a) * std::sqrt(sq_b));
  return std::clamp(value, -1.0, 1.0);
}

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw FormatError("cosine_similarity: dimension mismatch (" +
                      std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
  const double sq_a = squared_norm(a);
  const double sq_b = squared_norm(b);
  if (!(sq_a > 0.0) || !(sq_b > 0.0)) {
    throw DomainError("cosine_similarity: zero-norm vector");
  }
  return finish_cosine(dot(a, b), sq_a, sq_b);
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw FormatError("embedding dimension must be positive");
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<float> data,
                                 std::vector<std::string> ids)
    : dim_(dim), data_(std::move(data)), ids_(std::move(ids)) {
  if (dim_ == 0) throw FormatError("embedding dimension must be positive");
  if (data_.size() != ids_.size() * dim_) {
    throw FormatError("embedding payload has " + std::to_string(data_.size()) +
                      " values, expected " +
                      std::to_string(ids_.size() * dim_));
  }
  std::unordered_set<std::string> seen;
  seen.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!seen.insert(ids_[i]).second) {
      throw FormatError("duplicate embedding id '" + ids_[i] + "'");
    }
    const auto r = row(i);
    for (float x : r) {
      if (!std::isfinite(x)) {
        throw FormatError("non-finite value in row '" + ids_[i] + "'");
      }
    }
    if (!(squared_norm(r) > 0.0)) {
      throw FormatError("zero-norm row '" + ids_[i] + "'");
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::select_rows(
    std::span<const std::size_t> rows) const {
  std::vector<float> data;
  std::vector<std::string> ids;
  data.reserve(rows.size() * dim_);
  ids.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= count()) throw DomainError("select_rows: row index out of range");
    const auto src = row(r);
    data.insert(data.end(), src.begin(), src.end());
    ids.push_back(ids_[r]);
  }
  return EmbeddingMatrix(dim_, std::move(data), std::move(ids));
}

EmbeddingMatrix EmbeddingMatrix::concat(const EmbeddingMatrix& other) const {
  if (other.dim_ != dim_) throw FormatError("concat: dimension mismatch");
  std::vector<float> data = data_;
  data.insert(data.end(), other.data_.begin(), other.data_.end());
  std::vector<std::string> ids = ids_;
  ids.insert(ids.end(), other.ids_.begin(), other.ids_.end());
  return EmbeddingMatrix(dim_, std::move(data), std::move(ids));
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  return cosine_impl(a, b);
}

double cosine_similarity(std::span<const double> a,
                         std::span<const double> b) {
  return cosine_impl(a, b);
}

SimilarityMatrix pairwise_similarity(const EmbeddingMatrix& a,
                                     const EmbeddingMatrix& b,
                                     std::size_t parallelism) {
  if (a.dim() != b.dim()) {
    throw FormatError("pairwise_similarity: dimension mismatch (" +
                      std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()) + ")");
  }
  SimilarityMatrix out;
  out.rows = a.count();
  out.cols = b.count();
  out.values.assign(out.rows * out.cols, 0.0);

  std::vector<double> sq_b(b.count());
  for (std::size_t j = 0; j < b.count(); ++j) sq_b[j] = squared_norm(b.row(j));

  parallel_for(a.count(), parallelism, [&](std::size_t i) {
    const auto ra = a.row(i);
    const double sq_a = squared_norm(ra);
    double* dst = out.values.data() + i * out.cols;
    for (std::size_t j = 0; j < b.count(); ++j) {
      dst[j] = finish_cosine(dot(ra, b.row(j)), sq_a, sq_b[j]);
    }
  });
  return out;
}

double max_similarity_to_refs(std::span<const float> v,
                              const EmbeddingMatrix& refs) {
  if (refs.empty()) {
    throw DomainError("max_similarity_to_refs: empty reference set");
  }
  if (v.size() != refs.dim()) {
    throw FormatError("max_similarity_to_refs: dimension mismatch");
  }
  double best = -1.0;
  for (std::size_t r = 0; r < refs.count(); ++r) {
    best = std::max(best, cosine_similarity(v, refs.row(r)));
  }
  return best;
}

std::vector<double> similarity_to_axis(const EmbeddingMatrix& m,
                                       std::span<const float> axis) {
  if (axis.size() != m.dim()) {
    throw FormatError("similarity_to_axis: dimension mismatch");
  }
  std::vector<double> out(m.count());
  for (std::size_t i = 0; i < m.count(); ++i) {
    out[i] = cosine_similarity(m.row(i), axis);
  }
  return out;
}

}  // namespace imthresh
