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

#ifndef CPKIT_CONSENSUS_HPP_
#define CPKIT_CONSENSUS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "cpkit/core.hpp"

namespace cpkit {

// Per-class vote counts for one annotation set.
std::vector<std::size_t> vote_counts(const AnnotationSet& a, std::size_t k);

// Strict-plurality majority vote. Returns the winning class when its count
// is at least `min_agreement` and strictly larger than every other count;
// std::nullopt marks the sample as excluded (ties included).
// Throws std::invalid_argument if min_agreement < 2.
std::optional<ClassIndex> majority_vote(const AnnotationSet& a, std::size_t min_agreement);

struct ConsensusRow {
  std::string sample_id;
  std::optional<ClassIndex> label;  // nullopt = excluded
  std::vector<std::size_t> votes;
};

// One row per annotated sample, in sample_id order.
std::vector<ConsensusRow> build_consensus(const AnnotationMap& annotations,
                                          const LabelSpace& ls, std::size_t min_agreement);

// Returns a copy of `annotations` with AnnotationSet::consensus filled in.
AnnotationMap with_consensus(const AnnotationMap& annotations, const LabelSpace& ls,
                             std::size_t min_agreement);

struct KappaResult {
  double kappa = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_items = 0;        // items used in the estimate
  std::size_t raters = 0;         // common rater count m of those items
  std::size_t n_excluded = 0;     // items dropped for a different rater count
  std::size_t n_resamples = 0;    // bootstrap resamples with a defined kappa
  std::map<std::size_t, std::size_t> n_raters_per_item;  // m -> item count, all items
};

inline constexpr std::size_t kDefaultBootstrapResamples = 1000;

// Fleiss' kappa on an item x category count matrix where every row sums to
// the same m >= 2. Throws DataError if fewer than 2 items or if all ratings
// fall in a single category (kappa undefined).
double fleiss_kappa_counts(const std::vector<std::vector<std::size_t>>& counts);

// Fleiss' kappa with a percentile-bootstrap 95% CI over items.
KappaResult fleiss_kappa(const std::vector<AnnotationSet>& annotations, const LabelSpace& ls,
                         std::size_t bootstrap_n = kDefaultBootstrapResamples,
                         std::uint64_t seed = 0);
KappaResult fleiss_kappa(const AnnotationMap& annotations, const LabelSpace& ls,
                         std::size_t bootstrap_n = kDefaultBootstrapResamples,
                         std::uint64_t seed = 0);

// Landis & Koch verbal band, e.g. "fair agreement" for 0.21-0.40.
std::string_view agreement_band(double kappa);

}  // namespace cpkit

#endif  // CPKIT_CONSENSUS_HPP_
