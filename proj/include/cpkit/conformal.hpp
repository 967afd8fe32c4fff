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

#ifndef CPKIT_CONFORMAL_HPP_
#define CPKIT_CONFORMAL_HPP_

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cpkit/core.hpp"

namespace cpkit {

// Split-conformal set predictors over softmax outputs.
//
//   LAC   score 1 - p_y;            set {y : p_y >= 1 - q}
//   APS   score = cumulative sorted mass through y;
//         set = shortest sorted prefix whose mass reaches q
//   RAPS  APS score + lambda * (rank(y) - k_reg);
//         set = shortest prefix with mass + lambda * (k - k_reg) >= q
//
// q is the ceil((1 - alpha)(n + 1))-th smallest calibration score, or
// +infinity when that rank exceeds n (every set is then the full label set).
// Sorting is by descending probability with ties broken by ascending class
// index, and no randomization is applied, so every output is deterministic.

enum class Method { kLac, kAps, kRaps };

std::string_view method_name(Method m);
// Accepts "lac", "aps", "raps" (case-insensitive). Throws std::invalid_argument.
Method parse_method(std::string_view name);

struct RapsParams {
  double lambda = 0.0;
  std::size_t k_reg = 1;
  // Use (k - k_reg)^+ instead of the signed penalty.
  bool positive_part = false;

  bool operator==(const RapsParams&) const = default;
};

struct ConformalMethod {
  Method variant = Method::kLac;
  // Present iff variant == kRaps.
  std::optional<RapsParams> raps;

  static ConformalMethod lac() { return {Method::kLac, std::nullopt}; }
  static ConformalMethod aps() { return {Method::kAps, std::nullopt}; }
  static ConformalMethod raps_with(RapsParams p) { return {Method::kRaps, p}; }

  bool operator==(const ConformalMethod&) const = default;
};

inline constexpr double kInfiniteQuantile = std::numeric_limits<double>::infinity();

inline constexpr std::array<double, 5> kRapsLambdaGrid = {0.001, 0.01, 0.1, 0.2, 0.5};
inline constexpr std::size_t kRapsMinCalibration = 10;

class CalibratedPredictor {
 public:
  // Validates the invariants; throws std::invalid_argument on violation.
  CalibratedPredictor(ConformalMethod method, double alpha, double q_hat,
                      std::size_t n_cal, LabelSpace label_space);

  const ConformalMethod& method() const { return method_; }
  double alpha() const { return alpha_; }
  double q_hat() const { return q_hat_; }
  bool is_full_set() const { return q_hat_ == kInfiniteQuantile; }
  std::size_t n_cal() const { return n_cal_; }
  const LabelSpace& label_space() const { return label_space_; }

  bool operator==(const CalibratedPredictor&) const = default;

 private:
  ConformalMethod method_;
  double alpha_;
  double q_hat_;
  std::size_t n_cal_;
  LabelSpace label_space_;
};

struct SortedProbs {
  std::vector<ClassIndex> order;  // classes by descending probability
  std::vector<double> cum;        // cum[i] = sum of the first i+1 sorted probs

  // 1-indexed position of class c in `order`.
  std::size_t rank_of(ClassIndex c) const;
};

SortedProbs sort_probs(std::span<const double> probs);

double score_lac(const SoftmaxRecord& r);
double score_aps(const SoftmaxRecord& r);
double score_raps(const SoftmaxRecord& r, const RapsParams& params);
double score_raps(const SoftmaxRecord& r, double lambda, std::size_t k_reg);
double score(const ConformalMethod& method, const SoftmaxRecord& r);

// 1-indexed order-statistic rank ceil((1 - alpha)(n + 1)).
std::size_t quantile_rank(std::size_t n, double alpha);

// Returns the quantile_rank-th smallest score, or kInfiniteQuantile when the
// rank exceeds n. Throws DataError on empty input and std::invalid_argument
// for alpha outside (0, 1).
double conformal_quantile(std::vector<double> scores, double alpha);

// Set members for one probability row under a fixed threshold.
std::vector<ClassIndex> conformal_set(const ConformalMethod& method, double q_hat,
                                      std::span<const double> probs);

struct CalibrationOptions {
  bool raps_positive_part = false;
};

struct RapsTuning {
  std::vector<std::size_t> tuning_indices;   // into the calibration records
  std::vector<std::size_t> scoring_indices;
  std::size_t k_reg = 1;
  // (lambda, q_hat on scoring split, mean width on tuning split), grid order.
  struct Candidate {
    double lambda;
    double q_hat;
    double mean_width;
  };
  std::vector<Candidate> candidates;
  std::size_t chosen = 0;
};

// Runs the RAPS hyperparameter search on a labeled calibration set.
RapsTuning tune_raps(const Dataset& cal, double alpha, std::uint64_t tuning_seed,
                     const CalibrationOptions& options = {});

// Every record must carry a true label (DataError otherwise). RAPS needs at
// least kRapsMinCalibration records.
CalibratedPredictor calibrate(const Dataset& cal, Method method, double alpha,
                              std::uint64_t tuning_seed,
                              const CalibrationOptions& options = {});

PredictionSet predict_set(const CalibratedPredictor& p, const SoftmaxRecord& r);
std::vector<PredictionSet> predict_sets(const CalibratedPredictor& p, const Dataset& d);

}  // namespace cpkit

#endif  // CPKIT_CONFORMAL_HPP_
