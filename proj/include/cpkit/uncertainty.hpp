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

#ifndef CPKIT_UNCERTAINTY_HPP_
#define CPKIT_UNCERTAINTY_HPP_

#include <vector>

#include "cpkit/conformal.hpp"
#include "cpkit/core.hpp"

namespace cpkit {

// Fraction of samples whose set width equals the number of distinct expert
// labels. Throws DataError for unannotated samples or empty input.
double aleatoric_capture(const std::vector<PredictionSet>& sets,
                         const AnnotationMap& annotations);

struct NoiseLevel {
  double sigma = 0.0;
  Dataset dataset;
};

struct NoiseSeries {
  std::vector<NoiseLevel> levels;
};

// Returns a description of the first broken invariant, or an empty string:
// sigmas >= 0 and strictly increasing, shared label space and sample ids.
std::string check_noise_series(const NoiseSeries& series);

struct WidthStats {
  double mean_width = 0.0;
  std::vector<std::size_t> histogram;  // index = width, 0..K
  double full_set_fraction = 0.0;
  std::size_t n = 0;
};

WidthStats width_stats(const std::vector<PredictionSet>& sets, std::size_t k);

struct LevelWidth {
  double sigma = 0.0;
  WidthStats stats;
};

struct WidthProfile {
  std::vector<LevelWidth> per_level;
  double trend_correlation = 0.0;
  // True when either sigmas or mean widths are constant, so the rank
  // correlation is undefined and trend_correlation is reported as 0.
  bool degenerate = false;
};

// Spearman rank correlation with average ranks for ties. Returns nullopt
// when either input is constant or shorter than 2.
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

// Throws DataError for an empty or invalid series or a label-space mismatch.
WidthProfile ood_width_profile(const CalibratedPredictor& p, const NoiseSeries& series);

struct OodComparison {
  WidthStats ind;
  WidthStats ood;
  double mean_width_difference = 0.0;  // OOD - InD
};

OodComparison ood_dataset_compare(const CalibratedPredictor& p, const Dataset& ind,
                                  const Dataset& ood);

}  // namespace cpkit

#endif  // CPKIT_UNCERTAINTY_HPP_
