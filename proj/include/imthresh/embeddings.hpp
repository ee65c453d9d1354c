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

#ifndef IMTHRESH_EMBEDDINGS_HPP_
#define IMTHRESH_EMBEDDINGS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace imthresh {

// Dense row-major collection of fixed-dimension embedding vectors, one per
// image, each tagged with a unique opaque id.
//
// Rows are stored exactly as supplied (float32, not re-normalized). Every row
// must be finite with a strictly positive norm; ids must be unique. The
// matrix is immutable once constructed and safe to share between threads.
class EmbeddingMatrix {
 public:
  // Empty matrix of the given dimension.
  explicit EmbeddingMatrix(std::size_t dim);

  // Validating constructor. Throws FormatError on size mismatch, duplicate
  // ids, non-finite values or zero-norm rows.
  EmbeddingMatrix(std::size_t dim, std::vector<float> data,
                  std::vector<std::string> ids);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> data() const noexcept { return data_; }

  // New matrix holding the given rows in the given order.
  EmbeddingMatrix select_rows(std::span<const std::size_t> rows) const;

  // Rows of `this` followed by rows of `other`. Ids must stay unique.
  EmbeddingMatrix concat(const EmbeddingMatrix& other) const;

  friend bool operator==(const EmbeddingMatrix&,
                         const EmbeddingMatrix&) = default;

 private:
  std::size_t dim_;
  std::vector<float> data_;
  std::vector<std::string> ids_;
};

// Row-major |rows| x |cols| matrix of cosine similarities.
struct SimilarityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const {
    return values[i * cols + j];
  }
};

// Cosine similarity accumulated in double precision, clamped to [-1, 1].
// Throws FormatError on dimension mismatch and DomainError on a zero-norm
// argument.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Entry (i, j) equals cosine_similarity(a.row(i), b.row(j)) bit for bit.
// `parallelism` splits rows of `a` across worker threads; output does not
// depend on it.
SimilarityMatrix pairwise_similarity(const EmbeddingMatrix& a,
                                     const EmbeddingMatrix& b,
                                     std::size_t parallelism = 1);

// Max cosine similarity between `v` and any row of `refs`.
double max_similarity_to_refs(std::span<const float> v,
                              const EmbeddingMatrix& refs);

// Cosine similarity of every row of `m` against a single axis vector.
std::vector<double> similarity_to_axis(const EmbeddingMatrix& m,
                                       std::span<const float> axis);

}  // namespace imthresh

#endif  // IMTHRESH_EMBEDDINGS_HPP_
