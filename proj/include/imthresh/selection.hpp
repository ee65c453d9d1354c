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

#ifndef IMTHRESH_SELECTION_HPP_
#define IMTHRESH_SELECTION_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "imthresh/embeddings.hpp"

namespace imthresh {

// Similarity graph over n candidate reference images and the requested
// subset size k. The matrix must be symmetric with a unit diagonal (both to
// 1e-9) and 2 <= k <= n.
class SelectionProblem {
 public:
  SelectionProblem(std::size_t n, std::vector<double> sim, std::size_t k);
  static SelectionProblem from_embeddings(const EmbeddingMatrix& m,
                                          std::size_t k);

  std::size_t size() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  double operator()(std::size_t i, std::size_t j) const {
    return sim_[i * n_ + j];
  }

 private:
  std::size_t n_;
  std::vector<double> sim_;
  std::size_t k_;
};

// sum_i max_{s in subset} max(0, sim(i, s)). Negative similarities are
// clamped so the function stays monotone submodular.
double facility_location_value(std::span<const std::size_t> subset,
                               const SelectionProblem& problem);

// Mean of sim(i, j) over unordered pairs of distinct subset members.
double average_pairwise_similarity(std::span<const std::size_t> subset,
                                   const SelectionProblem& problem);

struct DenseSubsetResult {
  std::vector<std::size_t> indices;  // ascending
  double facility_location = 0.0;
  double average_similarity = 0.0;
  // Upper bound on the optimal facility-location value for size k.
  double facility_location_bound = 0.0;
};

// Greedy facility-location maximization to k items (ties to the lower
// index) certifies an upper bound on the facility-location optimum. Starting
// from the greedy set and from dense-greedy sets grown around the 64 items
// with the largest total similarity, best-improvement single swaps then raise
// the average pairwise similarity. Swaps and starts are only admitted while
// the facility-location value stays at or above (1 - 1/e) of the bound, so
// the greedy approximation guarantee carries over to the result.
DenseSubsetResult select_dense_subset(const SelectionProblem& problem);

// Subset with the highest average pairwise similarity among all C(n, k)
// subsets; ties resolved to the lexicographically first. Requires
// C(n, k) <= 1e6.
std::vector<std::size_t> exhaustive_dense_subset(const SelectionProblem& problem);

// Parses a square numeric CSV without header.
std::vector<double> parse_similarity_csv(std::string_view text, std::size_t& n);

}  // namespace imthresh

#endif  // IMTHRESH_SELECTION_HPP_
