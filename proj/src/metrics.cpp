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

#include "cpkit/metrics.hpp"

#include <algorithm>
#include <iterator>

#include "cpkit/consensus.hpp"
#include "cpkit/errors.hpp"

namespace cpkit {

CoverageReport coverage_metrics(const std::vector<PredictionSet>& sets,
                                const ConsensusMap& consensus) {
  if (sets.empty()) throw DataError("coverage metrics over zero prediction sets");
  CoverageReport report;
  report.n = sets.size();
  std::map<std::size_t, std::size_t> covered_by_size;
  std::size_t covered = 0;
  std::size_t width_sum = 0;
  for (const auto& s : sets) {
    auto it = consensus.find(s.sample_id());
    if (it == consensus.end()) {
      throw DataError("no consensus label for sample " + s.sample_id());
    }
    const bool hit = s.contains(it->second);
    covered += hit;
    width_sum += s.width();
    ++report.per_size_coverage[s.width()].count;
    covered_by_size[s.width()] += hit;
  }
  const double n = static_cast<double>(sets.size());
  report.cc = static_cast<double>(covered) / n;
  report.mean_width = static_cast<double>(width_sum) / n;
  report.ssc = 1.0;
  for (auto& [size, group] : report.per_size_coverage) {
    group.coverage =
        static_cast<double>(covered_by_size[size]) / static_cast<double>(group.count);
    report.ssc = std::min(report.ssc, group.coverage);
  }
  return report;
}

SampleAgreement sample_agreement(const std::vector<ClassIndex>& predicted,
                                 const std::vector<ClassIndex>& expert_unique) {
  SampleAgreement a;
  std::vector<ClassIndex> inter;
  std::set_intersection(predicted.begin(), predicted.end(), expert_unique.begin(),
                        expert_unique.end(), std::back_inserter(inter));
  a.exact = predicted == expert_unique;
  if (predicted.empty() || expert_unique.empty()) return a;

  const double i = static_cast<double>(inter.size());
  const double uni = static_cast<double>(predicted.size() + expert_unique.size()) - i;
  a.precision = i / static_cast<double>(predicted.size());
  a.recall = i / static_cast<double>(expert_unique.size());
  if (a.precision + a.recall > 0.0) {
    a.f1 = 2.0 * a.precision * a.recall / (a.precision + a.recall);
  }
  a.jaccard = i / uni;
  return a;
}

AgreementReport agreement_metrics(const std::vector<PredictionSet>& sets,
                                  const AnnotationMap& annotations) {
  if (sets.empty()) throw DataError("agreement metrics over zero prediction sets");
  AgreementReport r;
  r.n = sets.size();
  // Summed in input order so results do not depend on scheduling.
  double p = 0.0, rec = 0.0, f1 = 0.0, jac = 0.0;
  std::size_t exact = 0;
  for (const auto& s : sets) {
    auto it = annotations.find(s.sample_id());
    if (it == annotations.end() || it->second.labels.empty()) {
      throw DataError("no expert annotations for sample " + s.sample_id());
    }
    const SampleAgreement a = sample_agreement(s.members(), it->second.unique_labels());
    p += a.precision;
    rec += a.recall;
    f1 += a.f1;
    jac += a.jaccard;
    exact += a.exact;
    r.n_empty_sets += s.width() == 0;
    r.n_zero_f1 += (a.precision + a.recall) == 0.0;
  }
  const double n = static_cast<double>(r.n);
  r.mean_precision = p / n;
  r.mean_recall = rec / n;
  r.mean_f1 = f1 / n;
  r.mean_jaccard = jac / n;
  r.exact_match_accuracy = static_cast<double>(exact) / n;
  return r;
}

ConsensusMap resolve_consensus(const Dataset& test, std::size_t min_agreement) {
  ConsensusMap out;
  for (const auto& r : test.records) {
    if (r.true_label) {
      out.emplace(r.sample_id, *r.true_label);
      continue;
    }
    auto it = test.annotations.find(r.sample_id);
    if (it == test.annotations.end()) continue;
    if (it->second.consensus) {
      out.emplace(r.sample_id, *it->second.consensus);
    } else if (auto vote = majority_vote(it->second, min_agreement)) {
      out.emplace(r.sample_id, *vote);
    }
  }
  return out;
}

std::vector<SweepCell> sweep_cells(const Dataset& cal, const Dataset& test,
                                   const SweepConfig& config) {
  if (!(cal.label_space == test.label_space)) {
    throw DataError("calibration and test label spaces differ");
  }
  if (!test.has_annotations()) {
    throw DataError("test dataset " + test.name + " has no expert annotations");
  }
  const ConsensusMap consensus = resolve_consensus(test, config.min_agreement);

  std::vector<SweepCell> cells;
  for (Method m : config.methods) {
    for (double alpha : config.alphas) {
      CalibratedPredictor p =
          calibrate(cal, m, alpha, config.seed, {config.raps_positive_part});
      std::vector<PredictionSet> sets = predict_sets(p, test);

      std::vector<PredictionSet> with_consensus;
      for (const auto& s : sets) {
        if (consensus.contains(s.sample_id())) with_consensus.push_back(s);
      }
      const CoverageReport cov = coverage_metrics(with_consensus, consensus);
      const AgreementReport agr = agreement_metrics(sets, test.annotations);

      EvaluationRow row{std::string(method_name(m)),
                        config.model,
                        alpha,
                        cov.cc,
                        cov.ssc,
                        cov.mean_width,
                        agr.mean_precision,
                        agr.mean_recall,
                        agr.mean_f1,
                        agr.mean_jaccard,
                        agr.exact_match_accuracy};
      cells.push_back({std::move(p), std::move(sets), std::move(row)});
    }
  }
  return cells;
}

EvaluationReport sweep(const Dataset& cal, const Dataset& test, const SweepConfig& config) {
  EvaluationReport report{test.name, {}};
  for (auto& cell : sweep_cells(cal, test, config)) report.rows.push_back(std::move(cell.row));
  return report;
}

}  // namespace cpkit
