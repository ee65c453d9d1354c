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

#include "imthresh/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "imthresh/errors.hpp"
#include "imthresh/text_format.hpp"

namespace imthresh {
namespace {

constexpr double kTolerance = 1e-9;
constexpr double kMinImprovement = 1e-12;
constexpr double kMaxSubsets = 1e6;
constexpr std::size_t kMaxDenseStarts = 64;
constexpr std::size_t kLagrangianIterations = 300;
constexpr std::size_t kLagrangianPatience = 10;

double clamped(double v) { return v > 0.0 ? v : 0.0; }

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return r;
}

// coverage[i] = max over the set of clamped sim(i, s).
double marginal_gain(const SelectionProblem& p, const std::vector<double>& coverage,
                     std::size_t candidate) {
  double gain = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    gain += std::max(0.0, clamped(p(i, candidate)) - coverage[i]);
  }
  return gain;
}

// f(S) + sum of the k largest marginal gains over S bounds the optimum.
double bound_from(const SelectionProblem& p, const std::vector<double>& coverage,
                  const std::vector<bool>& in_set) {
  double value = 0.0;
  for (double c : coverage) value += c;
  std::vector<double> gains;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (!in_set[c]) gains.push_back(marginal_gain(p, coverage, c));
  }
  const std::size_t take = std::min(p.k(), gains.size());
  std::partial_sort(gains.begin(), gains.begin() + take, gains.end(),
                    std::greater<>());
  for (std::size_t i = 0; i < take; ++i) value += gains[i];
  return value;
}

// Lagrangian dual of the assignment constraints: for any u,
//   sum_i u_i + (k largest of sum_i max(0, sim(i, j) - u_i) over j)
// bounds the facility-location optimum. Starting from u = `coverage` of a
// set S reproduces f(S) + top-k gains; projected subgradient steps (Polyak
// rule against `lower`, the best value found) then tighten it.
double lagrangian_bound(const SelectionProblem& p, std::vector<double> u, double lower) {
  const std::size_t n = p.size();
  const std::size_t k = p.k();
  std::vector<double> gain(n);
  std::vector<std::size_t> order(n);
  std::vector<double> subgradient(n);
  double best = std::numeric_limits<double>::infinity();
  double theta = 1.0;
  std::size_t stale = 0;
  for (std::size_t iter = 0; iter < kLagrangianIterations; ++iter) {
    for (std::size_t j = 0; j < n; ++j) {
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += std::max(0.0, clamped(p(i, j)) - u[i]);
      gain[j] = g;
      order[j] = j;
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        return gain[a] != gain[b] ? gain[a] > gain[b] : a < b;
                      });
    double value = 0.0;
    for (double x : u) value += x;
    for (std::size_t r = 0; r < k; ++r) value += gain[order[r]];
    if (value < best - kMinImprovement) {
      best = value;
      stale = 0;
    } else if (++stale >= kLagrangianPatience) {
      theta /= 2.0;
      stale = 0;
    }
    // d/du_i = 1 - #{selected j : sim(i, j) > u_i}
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double g = 1.0;
      for (std::size_t r = 0; r < k; ++r) {
        if (clamped(p(i, order[r])) > u[i]) g -= 1.0;
      }
      subgradient[i] = g;
      norm += g * g;
    }
    if (norm == 0.0 || value - lower <= kMinImprovement) break;
    const double step = theta * (value - lower) / norm;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = std::max(0.0, u[i] - step * subgradient[i]);
    }
  }
  return best;
}

// Best-improvement single swaps on the pair sum, keeping the facility-location
// value at or above `floor_value`. `chosen` is left sorted.
void local_search(const SelectionProblem& problem, double floor_value,
                  std::vector<std::size_t>& chosen) {
  const std::size_t n = problem.size();
  const std::size_t k = chosen.size();
  std::vector<bool> in_set(n, false);
  for (std::size_t c : chosen) in_set[c] = true;
  std::sort(chosen.begin(), chosen.end());
  std::vector<double> row_sum(n, 0.0);  // sum of sim(x, s) over s in chosen
  auto recompute_row_sums = [&] {
    for (std::size_t x = 0; x < n; ++x) {
      double s = 0.0;
      for (std::size_t c : chosen) s += problem(x, c);
      row_sum[x] = s;
    }
  };
  recompute_row_sums();
  std::vector<std::size_t> trial(k);
  while (true) {
    double best_delta = kMinImprovement;
    std::size_t best_out = n, best_in = n;
    for (std::size_t o = 0; o < k; ++o) {
      const std::size_t out = chosen[o];
      for (std::size_t in = 0; in < n; ++in) {
        if (in_set[in]) continue;
        // Pair-sum change from replacing `out` with `in`.
        const double delta =
            (row_sum[in] - problem(in, out)) - (row_sum[out] - problem(out, out));
        if (!(delta > best_delta)) continue;
        trial = chosen;
        trial[o] = in;
        if (facility_location_value(trial, problem) < floor_value) continue;
        best_delta = delta;
        best_out = o;
        best_in = in;
      }
    }
    if (best_in == n) break;
    in_set[chosen[best_out]] = false;
    in_set[best_in] = true;
    chosen[best_out] = best_in;
    std::sort(chosen.begin(), chosen.end());
    recompute_row_sums();
  }
}

}  // namespace

SelectionProblem::SelectionProblem(std::size_t n, std::vector<double> sim,
                                   std::size_t k)
    : n_(n), sim_(std::move(sim)), k_(k) {
  if (sim_.size() != n_ * n_) {
    throw FormatError("selection: similarity matrix must be n x n");
  }
  if (k_ < 2) throw DomainError("selection: k must be at least 2");
  if (k_ > n_) {
    throw DomainError("selection: k = " + std::to_string(k_) +
                      " exceeds the number of items " + std::to_string(n_));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (std::abs((*this)(i, i) - 1.0) > kTolerance) {
      throw DomainError("selection: diagonal entry " + std::to_string(i) +
                        " is not 1");
    }
    for (std::size_t j = 0; j < n_; ++j) {
      if (!std::isfinite((*this)(i, j))) {
        throw FormatError("selection: non-finite similarity");
      }
      if (std::abs((*this)(i, j) - (*this)(j, i)) > kTolerance) {
        throw DomainError("selection: similarity matrix is not symmetric");
      }
    }
  }
}

SelectionProblem SelectionProblem::from_embeddings(const EmbeddingMatrix& m,
                                                   std::size_t k) {
  auto sims = pairwise_similarity(m, m);
  // Self-similarity can round to 1 - 1ulp; pin the diagonal exactly.
  for (std::size_t i = 0; i < m.count(); ++i) sims.values[i * m.count() + i] = 1.0;
  for (std::size_t i = 0; i < m.count(); ++i) {
    for (std::size_t j = i + 1; j < m.count(); ++j) {
      sims.values[j * m.count() + i] = sims.values[i * m.count() + j];
    }
  }
  return SelectionProblem(m.count(), std::move(sims.values), k);
}

double facility_location_value(std::span<const std::size_t> subset,
                               const SelectionProblem& problem) {
  if (subset.empty()) throw DomainError("facility_location_value: empty subset");
  for (std::size_t s : subset) {
    if (s >= problem.size()) {
      throw DomainError("facility_location_value: index out of range");
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    double best = 0.0;
    for (std::size_t s : subset) best = std::max(best, clamped(problem(i, s)));
    total += best;
  }
  return total;
}

double average_pairwise_similarity(std::span<const std::size_t> subset,
                                   const SelectionProblem& problem) {
  if (subset.size() < 2) {
    throw DomainError("average_pairwise_similarity: need at least 2 items");
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < subset.size(); ++a) {
    for (std::size_t b = a + 1; b < subset.size(); ++b) {
      sum += problem(subset[a], subset[b]);
    }
  }
  const double pairs = static_cast<double>(subset.size() * (subset.size() - 1) / 2);
  return sum / pairs;
}

DenseSubsetResult select_dense_subset(const SelectionProblem& problem) {
  const std::size_t n = problem.size();
  const std::size_t k = problem.k();

  // Greedy facility location.
  std::vector<double> coverage(n, 0.0);
  std::vector<bool> in_set(n, false);
  std::vector<std::size_t> greedy;
  double bound = static_cast<double>(n);  // every item covered at most once
  for (std::size_t step = 0; step < k; ++step) {
    bound = std::min(bound, bound_from(problem, coverage, in_set));
    std::size_t best = n;
    double best_gain = -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (in_set[c]) continue;
      const double gain = marginal_gain(problem, coverage, c);
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    in_set[best] = true;
    greedy.push_back(best);
    for (std::size_t i = 0; i < n; ++i) {
      coverage[i] = std::max(coverage[i], clamped(problem(i, best)));
    }
  }
  bound = std::min(bound, bound_from(problem, coverage, in_set));
  bound = std::min(bound, lagrangian_bound(problem, coverage,
                                           facility_location_value(greedy, problem)));

  // Starting points: the greedy set, then dense-greedy sets grown from the
  // items with the largest total similarity. f(S) + top-k gains bounds the
  // optimum for any S, so every prefix also tightens the bound.
  std::vector<std::vector<std::size_t>> starts{greedy};
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) degree[i] += problem(i, j);
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return degree[a] > degree[b]; });
  order.resize(std::min(n, kMaxDenseStarts));
  for (std::size_t seed : order) {
    std::vector<std::size_t> set{seed};
    std::vector<double> row_sum(n);
    for (std::size_t x = 0; x < n; ++x) row_sum[x] = problem(x, seed);
    std::vector<bool> used(n, false);
    used[seed] = true;
    std::vector<double> cover(n);
    for (std::size_t x = 0; x < n; ++x) cover[x] = clamped(problem(x, seed));
    while (true) {
      bound = std::min(bound, bound_from(problem, cover, used));
      if (set.size() == k) break;
      std::size_t best = n;
      for (std::size_t c = 0; c < n; ++c) {
        if (!used[c] && (best == n || row_sum[c] > row_sum[best])) best = c;
      }
      used[best] = true;
      set.push_back(best);
      for (std::size_t x = 0; x < n; ++x) {
        row_sum[x] += problem(x, best);
        cover[x] = std::max(cover[x], clamped(problem(x, best)));
      }
    }
    starts.push_back(set);
  }
  const double floor_value = (1.0 - 1.0 / std::numbers::e) * bound;

  std::vector<std::size_t> chosen;
  double chosen_avg = 0.0;
  for (auto& start : starts) {
    if (facility_location_value(start, problem) < floor_value) continue;
    local_search(problem, floor_value, start);
    const double avg = average_pairwise_similarity(start, problem);
    if (chosen.empty() || avg > chosen_avg + kMinImprovement) {
      chosen = start;
      chosen_avg = avg;
    }
  }

  DenseSubsetResult result;
  result.indices = chosen;
  result.facility_location = facility_location_value(chosen, problem);
  result.average_similarity = chosen_avg;
  result.facility_location_bound = bound;
  return result;
}

std::vector<std::size_t> exhaustive_dense_subset(const SelectionProblem& problem) {
  const std::size_t n = problem.size();
  const std::size_t k = problem.k();
  if (binomial(n, k) > kMaxSubsets) {
    throw DomainError("exhaustive_dense_subset: C(" + std::to_string(n) + ", " +
                      std::to_string(k) + ") exceeds 1e6 subsets");
  }
  std::vector<std::size_t> current(k);
  for (std::size_t i = 0; i < k; ++i) current[i] = i;
  std::vector<std::size_t> best = current;
  double best_value = average_pairwise_similarity(current, problem);
  while (true) {
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && current[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
    const double value = average_pairwise_similarity(current, problem);
    if (value > best_value) {
      best_value = value;
      best = current;
    }
  }
  return best;
}

std::vector<double> parse_similarity_csv(std::string_view text, std::size_t& n) {
  const auto rows = parse_csv(text);
  n = rows.size();
  std::vector<double> values;
  values.reserve(n * n);
  for (const auto& row : rows) {
    if (row.size() != n) {
      throw FormatError("similarity CSV must be square (" + std::to_string(n) +
                        " rows, a row has " + std::to_string(row.size()) +
                        " fields)");
    }
    for (const auto& f : row) values.push_back(parse_double(f));
  }
  return values;
}

}  // namespace imthresh
