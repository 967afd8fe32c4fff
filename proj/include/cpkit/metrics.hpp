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

#ifndef CPKIT_METRICS_HPP_
#define CPKIT_METRICS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cpkit/conformal.hpp"
#include "cpkit/core.hpp"

namespace cpkit {

using ConsensusMap = std::map<std::string, ClassIndex>;

struct SizeGroup {
  double coverage = 0.0;
  std::size_t count = 0;
};

struct CoverageReport {
  double cc = 0.0;
  double ssc = 0.0;
  double mean_width = 0.0;
  std::size_t n = 0;
  std::map<std::size_t, SizeGroup> per_size_coverage;  // keyed by set width
};

// CC, SSC (minimum coverage over observed set sizes, size 0 included) and
// mean width against consensus labels. Throws DataError if a set has no
// consensus label or the input is empty.
CoverageReport coverage_metrics(const std::vector<PredictionSet>& sets,
                                const ConsensusMap& consensus);

struct SampleAgreement {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double jaccard = 0.0;
  bool exact = false;
};

// Compares one prediction set with the unique expert labels. An empty
// prediction set scores 0 on every measure.
SampleAgreement sample_agreement(const std::vector<ClassIndex>& predicted,
                                 const std::vector<ClassIndex>& expert_unique);

struct AgreementReport {
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  double mean_jaccard = 0.0;
  double exact_match_accuracy = 0.0;
  std::size_t n = 0;
  std::size_t n_empty_sets = 0;  // samples scored 0 because C was empty
  std::size_t n_zero_f1 = 0;     // samples with precision + recall = 0
};

// Throws DataError if a set's sample has no (or an empty) annotation set.
AgreementReport agreement_metrics(const std::vector<PredictionSet>& sets,
                                  const AnnotationMap& annotations);

// One (method, alpha) line of an evaluation report.
struct EvaluationRow {
  std::string method;
  std::string model;
  double alpha = 0.0;
  double cc = 0.0;
  double ssc = 0.0;
  double mean_width = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  double mean_jaccard = 0.0;
  double exact_match = 0.0;

  bool operator==(const EvaluationRow&) const = default;
};

struct EvaluationReport {
  std::string dataset;
  std::vector<EvaluationRow> rows;
};

inline const std::vector<double> kDefaultAlphas = {0.05, 0.1, 0.15, 0.2};

struct SweepConfig {
  std::vector<Method> methods = {Method::kLac, Method::kAps, Method::kRaps};
  std::vector<double> alphas = kDefaultAlphas;
  std::string model = "model";
  std::uint64_t seed = 0;
  std::size_t min_agreement = 2;
  bool raps_positive_part = false;
};

// Consensus used for coverage: the record's true label when present,
// otherwise the majority vote of its annotations (excluded samples dropped).
ConsensusMap resolve_consensus(const Dataset& test, std::size_t min_agreement);

struct SweepCell {
  CalibratedPredictor predictor;
  std::vector<PredictionSet> sets;
  EvaluationRow row;
};

// Calibrates every (method, alpha) pair on `cal`, predicts on `test` and
// evaluates. Cells are ordered method-major in config order. `test` must
// carry annotations.
std::vector<SweepCell> sweep_cells(const Dataset& cal, const Dataset& test,
                                   const SweepConfig& config);
EvaluationReport sweep(const Dataset& cal, const Dataset& test, const SweepConfig& config);

}  // namespace cpkit

#endif  // CPKIT_METRICS_HPP_
