/*
 * Copyright 2026 The cpkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cpkit/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpkit/errors.hpp"
#include "cpkit/random.hpp"

namespace cpkit {

std::vector<std::size_t> vote_counts(const AnnotationSet& a, std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (const auto& l : a.labels) {
    if (l.label >= k) {
      throw DataError("sample " + a.sample_id + " has label index " +
                      std::to_string(l.label) + " outside the label space");
    }
    ++counts[l.label];
  }
  return counts;
}

std::optional<ClassIndex> majority_vote(const AnnotationSet& a, std::size_t min_agreement) {
  if (min_agreement < 2) throw std::invalid_argument("min_agreement must be >= 2");
  if (a.labels.empty()) return std::nullopt;
  ClassIndex max_label = 0;
  for (const auto& l : a.labels) max_label = std::max(max_label, l.label);
  const auto counts = vote_counts(a, max_label + 1);

  const auto best = std::max_element(counts.begin(), counts.end());
  const std::size_t top = *best;
  if (top < min_agreement) return std::nullopt;
  if (std::count(counts.begin(), counts.end(), top) > 1) return std::nullopt;
  return static_cast<ClassIndex>(best - counts.begin());
}

std::vector<ConsensusRow> build_consensus(const AnnotationMap& annotations,
                                          const LabelSpace& ls, std::size_t min_agreement) {
  std::vector<ConsensusRow> rows;
  rows.reserve(annotations.size());
  for (const auto& [id, a] : annotations) {
    rows.push_back({id, majority_vote(a, min_agreement), vote_counts(a, ls.size())});
  }
  return rows;
}

AnnotationMap with_consensus(const AnnotationMap& annotations, const LabelSpace& ls,
                             std::size_t min_agreement) {
  AnnotationMap out = annotations;
  for (auto& [id, a] : out) {
    vote_counts(a, ls.size());  // range check
    a.consensus = majority_vote(a, min_agreement);
  }
  return out;
}

double fleiss_kappa_counts(const std::vector<std::vector<std::size_t>>& counts) {
  if (counts.size() < 2) throw DataError("Fleiss' kappa needs at least 2 items");
  const std::size_t k = counts.front().size();
  std::size_t m = 0;
  for (std::size_t c : counts.front()) m += c;
  if (m < 2) throw DataError("Fleiss' kappa needs at least 2 raters per item");

  const double n_items = static_cast<double>(counts.size());
  const double md = static_cast<double>(m);
  std::vector<double> category_totals(k, 0.0);
  double agreement_sum = 0.0;
  for (const auto& row : counts) {
    if (row.size() != k) throw InvariantError("ragged count matrix");
    std::size_t row_total = 0;
    double squares = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row_total += row[j];
      squares += static_cast<double>(row[j]) * static_cast<double>(row[j]);
      category_totals[j] += static_cast<double>(row[j]);
    }
    if (row_total != m) throw DataError("items have differing rater counts");
    agreement_sum += (squares - md) / (md * (md - 1.0));
  }
  const double observed = agreement_sum / n_items;
  double expected = 0.0;
  for (double t : category_totals) {
    const double p = t / (n_items * md);
    expected += p * p;
  }
  if (expected >= 1.0) {
    throw DataError("Fleiss' kappa undefined: every rating falls in one category");
  }
  return (observed - expected) / (1.0 - expected);
}

KappaResult fleiss_kappa(const std::vector<AnnotationSet>& annotations, const LabelSpace& ls,
                         std::size_t bootstrap_n, std::uint64_t seed) {
  KappaResult result;
  for (const auto& a : annotations) ++result.n_raters_per_item[a.labels.size()];

  // Most common rater count among items with at least two ratings; ties go
  // to the larger count.
  std::size_t m = 0;
  std::size_t m_items = 0;
  for (const auto& [raters, items] : result.n_raters_per_item) {
    if (raters >= 2 && items >= m_items) {
      m = raters;
      m_items = items;
    }
  }
  if (m == 0) throw DataError("Fleiss' kappa needs items with at least 2 raters");

  std::vector<std::vector<std::size_t>> counts;
  for (const auto& a : annotations) {
    if (a.labels.size() != m) {
      ++result.n_excluded;
      continue;
    }
    counts.push_back(vote_counts(a, ls.size()));
  }
  result.raters = m;
  result.n_items = counts.size();
  result.kappa = fleiss_kappa_counts(counts);

  std::vector<double> replicates;
  replicates.reserve(bootstrap_n);
  std::vector<std::vector<std::size_t>> sample(counts.size());
  for (std::size_t b = 0; b < bootstrap_n; ++b) {
    Rng rng(derive_seed(seed, b));
    for (auto& row : sample) row = counts[rng.below(counts.size())];
    try {
      replicates.push_back(fleiss_kappa_counts(sample));
    } catch (const DataError&) {
      // Resample landed in a single category; kappa undefined there.
    }
  }
  result.n_resamples = replicates.size();
  if (replicates.empty()) {
    result.ci_low = result.ci_high = result.kappa;
    return result;
  }
  std::sort(replicates.begin(), replicates.end());
  auto percentile = [&](double q) {
    const double pos = q * static_cast<double>(replicates.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return replicates[lo] + frac * (replicates[hi] - replicates[lo]);
  };
  result.ci_low = std::min(percentile(0.025), result.kappa);
  result.ci_high = std::max(percentile(0.975), result.kappa);
  return result;
}

KappaResult fleiss_kappa(const AnnotationMap& annotations, const LabelSpace& ls,
                         std::size_t bootstrap_n, std::uint64_t seed) {
  std::vector<AnnotationSet> items;
  items.reserve(annotations.size());
  for (const auto& [id, a] : annotations) items.push_back(a);
  return fleiss_kappa(items, ls, bootstrap_n, seed);
}

std::string_view agreement_band(double kappa) {
  if (kappa < 0.0) return "poor agreement";
  if (kappa <= 0.20) return "slight agreement";
  if (kappa <= 0.40) return "fair agreement";
  if (kappa <= 0.60) return "moderate agreement";
  if (kappa <= 0.80) return "substantial agreement";
  return "almost perfect agreement";
}

}  // namespace cpkit
