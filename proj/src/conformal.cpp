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

#include "cpkit/conformal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cpkit/errors.hpp"
#include "cpkit/random.hpp"

namespace cpkit {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kLac:
      return "lac";
    case Method::kAps:
      return "aps";
    case Method::kRaps:
      return "raps";
  }
  throw InvariantError("unknown method enum");
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "lac") return Method::kLac;
  if (lower == "aps") return Method::kAps;
  if (lower == "raps") return Method::kRaps;
  throw std::invalid_argument("unknown conformal method " + std::string(name));
}

CalibratedPredictor::CalibratedPredictor(ConformalMethod method, double alpha, double q_hat,
                                         std::size_t n_cal, LabelSpace label_space)
    : method_(std::move(method)),
      alpha_(alpha),
      q_hat_(q_hat),
      n_cal_(n_cal),
      label_space_(std::move(label_space)) {
  if (!(alpha_ > 0.0 && alpha_ < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0,1), got " + std::to_string(alpha_));
  }
  if (n_cal_ < 1) throw std::invalid_argument("n_cal must be >= 1");
  if (std::isnan(q_hat_) || q_hat_ == -kInfiniteQuantile) {
    throw std::invalid_argument("q_hat must be a real number or +inf");
  }
  const bool is_raps = method_.variant == Method::kRaps;
  if (is_raps != method_.raps.has_value()) {
    throw std::invalid_argument("RAPS parameters present iff method is RAPS");
  }
  if (is_raps) {
    const auto& rp = *method_.raps;
    if (!(rp.lambda >= 0.0) || !std::isfinite(rp.lambda)) {
      throw std::invalid_argument("RAPS lambda must be finite and >= 0");
    }
    if (rp.k_reg < 1 || rp.k_reg > label_space_.size()) {
      throw std::invalid_argument("RAPS k_reg must lie in [1,K]");
    }
  }
  if (!is_full_set()) {
    if (method_.variant == Method::kLac && (q_hat_ < 0.0 || q_hat_ > 1.0)) {
      throw std::invalid_argument("LAC q_hat must lie in [0,1] or be +inf");
    }
    if (method_.variant == Method::kAps && q_hat_ < 0.0) {
      throw std::invalid_argument("APS q_hat must be >= 0 or +inf");
    }
  }
}

std::size_t SortedProbs::rank_of(ClassIndex c) const {
  auto it = std::find(order.begin(), order.end(), c);
  if (it == order.end()) throw InvariantError("class not in sorted order");
  return static_cast<std::size_t>(it - order.begin()) + 1;
}

SortedProbs sort_probs(std::span<const double> probs) {
  SortedProbs s;
  s.order.resize(probs.size());
  std::iota(s.order.begin(), s.order.end(), ClassIndex{0});
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](ClassIndex a, ClassIndex b) { return probs[a] > probs[b]; });
  s.cum.resize(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.order.size(); ++i) {
    acc += probs[s.order[i]];
    s.cum[i] = acc;
  }
  return s;
}

namespace {

ClassIndex require_label(const SoftmaxRecord& r) {
  if (!r.true_label) throw DataError("record " + r.sample_id + " has no true label");
  if (*r.true_label >= r.probs.size()) {
    throw DataError("record " + r.sample_id + " true label outside probability vector");
  }
  return *r.true_label;
}

double raps_penalty(const RapsParams& p, std::size_t k) {
  double excess = static_cast<double>(k) - static_cast<double>(p.k_reg);
  if (p.positive_part) excess = std::max(excess, 0.0);
  return p.lambda * excess;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
}

}  // namespace

double score_lac(const SoftmaxRecord& r) {
  return 1.0 - r.probs[require_label(r)];
}

double score_aps(const SoftmaxRecord& r) {
  const ClassIndex y = require_label(r);
  const SortedProbs s = sort_probs(r.probs);
  return s.cum[s.rank_of(y) - 1];
}

double score_raps(const SoftmaxRecord& r, const RapsParams& params) {
  const ClassIndex y = require_label(r);
  const SortedProbs s = sort_probs(r.probs);
  const std::size_t rank = s.rank_of(y);
  return s.cum[rank - 1] + raps_penalty(params, rank);
}

double score_raps(const SoftmaxRecord& r, double lambda, std::size_t k_reg) {
  return score_raps(r, RapsParams{lambda, k_reg, false});
}

double score(const ConformalMethod& method, const SoftmaxRecord& r) {
  switch (method.variant) {
    case Method::kLac:
      return score_lac(r);
    case Method::kAps:
      return score_aps(r);
    case Method::kRaps:
      return score_raps(r, method.raps.value());
  }
  throw InvariantError("unknown method enum");
}

std::size_t quantile_rank(std::size_t n, double alpha) {
  check_alpha(alpha);
  // The epsilon absorbs representation error in alpha, e.g. (1 - 0.2) * 10.
  const double target = (1.0 - alpha) * static_cast<double>(n + 1);
  return static_cast<std::size_t>(std::ceil(target - 1e-9));
}

double conformal_quantile(std::vector<double> scores, double alpha) {
  check_alpha(alpha);
  if (scores.empty()) throw DataError("conformal quantile of an empty score list");
  const std::size_t rank = quantile_rank(scores.size(), alpha);
  if (rank > scores.size()) return kInfiniteQuantile;
  const std::size_t idx = rank == 0 ? 0 : rank - 1;
  std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(idx),
                   scores.end());
  return scores[idx];
}

std::vector<ClassIndex> conformal_set(const ConformalMethod& method, double q_hat,
                                      std::span<const double> probs) {
  const std::size_t k = probs.size();
  std::vector<ClassIndex> members;
  if (q_hat == kInfiniteQuantile) {
    members.resize(k);
    std::iota(members.begin(), members.end(), ClassIndex{0});
    return members;
  }
  if (method.variant == Method::kLac) {
    // Compare scores, not 1 - q_hat, so a class whose score equals q_hat is kept.
    for (ClassIndex c = 0; c < k; ++c) {
      if (1.0 - probs[c] <= q_hat) members.push_back(c);
    }
    return members;
  }

  const SortedProbs s = sort_probs(probs);
  std::size_t size = k;  // fall back to the full set if q_hat is never reached
  for (std::size_t i = 0; i < k; ++i) {
    double value = s.cum[i];
    if (method.variant == Method::kRaps) value += raps_penalty(method.raps.value(), i + 1);
    if (value >= q_hat) {
      size = i + 1;
      break;
    }
  }
  members.assign(s.order.begin(), s.order.begin() + static_cast<std::ptrdiff_t>(size));
  std::sort(members.begin(), members.end());
  return members;
}

namespace {

void require_labeled(const Dataset& cal) {
  if (cal.records.empty()) throw DataError("calibration set " + cal.name + " is empty");
  for (const auto& r : cal.records) {
    if (!r.true_label) {
      throw DataError("calibration record " + r.sample_id + " has no true label");
    }
  }
}

}  // namespace

RapsTuning tune_raps(const Dataset& cal, double alpha, std::uint64_t tuning_seed,
                     const CalibrationOptions& options) {
  check_alpha(alpha);
  require_labeled(cal);
  const std::size_t n = cal.records.size();
  if (n < kRapsMinCalibration) {
    throw DataError("RAPS needs at least " + std::to_string(kRapsMinCalibration) +
                    " calibration records, got " + std::to_string(n));
  }
  const std::size_t k = cal.label_space.size();

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(tuning_seed, 0x52415053 /* "RAPS" */));
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }
  const std::size_t n_tune = n / 5;

  RapsTuning t;
  t.tuning_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_tune));
  t.scoring_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_tune), perm.end());
  std::sort(t.tuning_indices.begin(), t.tuning_indices.end());
  std::sort(t.scoring_indices.begin(), t.scoring_indices.end());

  // k_reg: corrected (1 - alpha) order statistic of the true-class rank.
  std::vector<std::size_t> ranks;
  ranks.reserve(n_tune);
  for (std::size_t i : t.tuning_indices) {
    const auto& r = cal.records[i];
    ranks.push_back(sort_probs(r.probs).rank_of(*r.true_label));
  }
  std::sort(ranks.begin(), ranks.end());
  const std::size_t rank = quantile_rank(n_tune, alpha);
  std::size_t k_reg = rank > n_tune ? k : ranks[rank == 0 ? 0 : rank - 1];
  t.k_reg = std::clamp<std::size_t>(k_reg, 1, k);

  std::vector<double> scores(t.scoring_indices.size());
  for (double lambda : kRapsLambdaGrid) {
    const auto method =
        ConformalMethod::raps_with({lambda, t.k_reg, options.raps_positive_part});
    for (std::size_t j = 0; j < t.scoring_indices.size(); ++j) {
      scores[j] = score(method, cal.records[t.scoring_indices[j]]);
    }
    const double q_hat = conformal_quantile(scores, alpha);
    std::size_t width_sum = 0;
    for (std::size_t i : t.tuning_indices) {
      width_sum += conformal_set(method, q_hat, cal.records[i].probs).size();
    }
    const double mean_width =
        static_cast<double>(width_sum) / static_cast<double>(t.tuning_indices.size());
    t.candidates.push_back({lambda, q_hat, mean_width});
  }
  // Grid is ascending, so strict < keeps the smaller lambda on ties.
  for (std::size_t i = 1; i < t.candidates.size(); ++i) {
    if (t.candidates[i].mean_width < t.candidates[t.chosen].mean_width) t.chosen = i;
  }
  return t;
}

CalibratedPredictor calibrate(const Dataset& cal, Method method, double alpha,
                              std::uint64_t tuning_seed, const CalibrationOptions& options) {
  check_alpha(alpha);
  require_labeled(cal);
  if (method == Method::kRaps) {
    const RapsTuning t = tune_raps(cal, alpha, tuning_seed, options);
    const auto& best = t.candidates[t.chosen];
    const auto cm =
        ConformalMethod::raps_with({best.lambda, t.k_reg, options.raps_positive_part});
    // Recompute on the scoring split with the chosen parameters.
    std::vector<double> scores;
    scores.reserve(t.scoring_indices.size());
    for (std::size_t i : t.scoring_indices) scores.push_back(score(cm, cal.records[i]));
    const double q_hat = conformal_quantile(std::move(scores), alpha);
    return CalibratedPredictor(cm, alpha, q_hat, t.scoring_indices.size(), cal.label_space);
  }

  const ConformalMethod cm = method == Method::kLac ? ConformalMethod::lac()
                                                   : ConformalMethod::aps();
  std::vector<double> scores;
  scores.reserve(cal.records.size());
  for (const auto& r : cal.records) scores.push_back(score(cm, r));
  const double q_hat = conformal_quantile(std::move(scores), alpha);
  return CalibratedPredictor(cm, alpha, q_hat, cal.records.size(), cal.label_space);
}

PredictionSet predict_set(const CalibratedPredictor& p, const SoftmaxRecord& r) {
  if (auto problem = check_probs(r.probs, p.label_space().size()); !problem.empty()) {
    throw DataError("record " + r.sample_id + ": " + problem);
  }
  return PredictionSet(r.sample_id, conformal_set(p.method(), p.q_hat(), r.probs));
}

std::vector<PredictionSet> predict_sets(const CalibratedPredictor& p, const Dataset& d) {
  if (!(d.label_space == p.label_space())) {
    throw DataError("dataset " + d.name + " label space does not match the predictor");
  }
  std::vector<PredictionSet> out;
  out.reserve(d.records.size());
  for (const auto& r : d.records) out.push_back(predict_set(p, r));
  return out;
}

}  // namespace cpkit
