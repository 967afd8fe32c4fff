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
#include <random>

#include "gtest/gtest.h"

#include "cpkit/errors.hpp"
#include "cpkit/synthetic.hpp"

namespace cpkit {
namespace {

constexpr ClassIndex kNilm = 0, kLsil = 1, kHsil = 2;

TEST(Coverage, WorkedExample) {
  const std::vector<PredictionSet> sets{
      PredictionSet("a", {0}), PredictionSet("b", {1}),
      PredictionSet("c", {0, 1}), PredictionSet("d", {2, 3})};
  const ConsensusMap y{{"a", 0}, {"b", 1}, {"c", 1}, {"d", 0}};
  const auto r = coverage_metrics(sets, y);
  EXPECT_DOUBLE_EQ(r.cc, 0.75);
  ASSERT_EQ(r.per_size_coverage.size(), 2u);
  EXPECT_DOUBLE_EQ(r.per_size_coverage.at(1).coverage, 1.0);
  EXPECT_DOUBLE_EQ(r.per_size_coverage.at(2).coverage, 0.5);
  EXPECT_EQ(r.per_size_coverage.at(2).count, 2u);
  EXPECT_DOUBLE_EQ(r.ssc, 0.5);
  EXPECT_DOUBLE_EQ(r.mean_width, 1.5);
  EXPECT_EQ(r.n, 4u);
}

TEST(Coverage, EmptySetGroupDrivesSscToZero) {
  const std::vector<PredictionSet> sets{PredictionSet("a", {}), PredictionSet("b", {1})};
  const auto r = coverage_metrics(sets, {{"a", 0}, {"b", 1}});
  EXPECT_DOUBLE_EQ(r.per_size_coverage.at(0).coverage, 0.0);
  EXPECT_DOUBLE_EQ(r.ssc, 0.0);
  EXPECT_DOUBLE_EQ(r.cc, 0.5);
}

TEST(Coverage, FullSetsCoverEverything) {
  std::vector<PredictionSet> sets;
  ConsensusMap y;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "s" + std::to_string(i);
    sets.emplace_back(id, std::vector<ClassIndex>{0, 1, 2, 3});
    y[id] = static_cast<ClassIndex>(i % 4);
  }
  const auto r = coverage_metrics(sets, y);
  EXPECT_EQ(r.cc, 1.0);
  EXPECT_EQ(r.ssc, 1.0);
  EXPECT_EQ(r.mean_width, 4.0);
}

TEST(Coverage, Errors) {
  EXPECT_THROW(coverage_metrics({}, {}), DataError);
  EXPECT_THROW(coverage_metrics({PredictionSet("a", {0})}, {{"b", 0}}), DataError);
}

TEST(Coverage, CcAtLeastSscAndPermutationInvariant) {
  std::mt19937 gen(11);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> cls(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PredictionSet> sets;
    ConsensusMap y;
    for (int i = 0; i < 30; ++i) {
      std::vector<ClassIndex> m;
      for (ClassIndex c = 0; c < 4; ++c)
        if (coin(gen)) m.push_back(c);
      const std::string id = "s" + std::to_string(i);
      sets.emplace_back(id, m);
      y[id] = static_cast<ClassIndex>(cls(gen));
    }
    const auto r = coverage_metrics(sets, y);
    EXPECT_GE(r.cc, r.ssc);
    std::shuffle(sets.begin(), sets.end(), gen);
    const auto s = coverage_metrics(sets, y);
    EXPECT_DOUBLE_EQ(s.cc, r.cc);
    EXPECT_DOUBLE_EQ(s.ssc, r.ssc);
    EXPECT_DOUBLE_EQ(s.mean_width, r.mean_width);
  }
}

TEST(SampleAgreement, WorkedExample) {
  const auto a = sample_agreement({kNilm, kLsil}, {kNilm, kLsil, kHsil});
  EXPECT_DOUBLE_EQ(a.precision, 1.0);
  EXPECT_DOUBLE_EQ(a.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(a.f1, 0.8);
  EXPECT_DOUBLE_EQ(a.jaccard, 2.0 / 3.0);
  EXPECT_FALSE(a.exact);
}

TEST(SampleAgreement, IdenticalAndEmpty) {
  const auto same = sample_agreement({kLsil, kHsil}, {kLsil, kHsil});
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.recall, 1.0);
  EXPECT_EQ(same.f1, 1.0);
  EXPECT_EQ(same.jaccard, 1.0);
  EXPECT_TRUE(same.exact);

  const auto empty = sample_agreement({}, {kNilm});
  EXPECT_EQ(empty.precision, 0.0);
  EXPECT_EQ(empty.recall, 0.0);
  EXPECT_EQ(empty.f1, 0.0);
  EXPECT_EQ(empty.jaccard, 0.0);
  EXPECT_FALSE(empty.exact);

  const auto disjoint = sample_agreement({kHsil}, {kNilm});
  EXPECT_EQ(disjoint.f1, 0.0);
  EXPECT_EQ(disjoint.jaccard, 0.0);
}

TEST(SampleAgreement, JaccardNeverExceedsF1) {
  std::mt19937 gen(3);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<ClassIndex> c, y;
    for (ClassIndex k = 0; k < 5; ++k) {
      if (coin(gen)) c.push_back(k);
      if (coin(gen)) y.push_back(k);
    }
    if (y.empty()) y.push_back(0);
    const auto a = sample_agreement(c, y);
    EXPECT_LE(a.jaccard, a.f1 + 1e-15);
    EXPECT_GE(a.f1, 0.0);
    EXPECT_LE(a.f1, 1.0);
  }
}

TEST(AgreementMetrics, AveragesAndCounts) {
  AnnotationMap ann;
  ann["a"] = AnnotationSet{"a", {{"e1", kNilm}, {"e2", kLsil}, {"e3", kHsil}}, std::nullopt};
  ann["b"] = AnnotationSet{"b", {{"e1", kNilm}, {"e2", kNilm}}, std::nullopt};
  const std::vector<PredictionSet> sets{PredictionSet("a", {kNilm, kLsil}), PredictionSet("b", {})};
  const auto r = agreement_metrics(sets, ann);
  EXPECT_EQ(r.n, 2u);
  EXPECT_EQ(r.n_empty_sets, 1u);
  EXPECT_DOUBLE_EQ(r.mean_precision, 0.5);
  EXPECT_DOUBLE_EQ(r.mean_f1, 0.4);
  EXPECT_DOUBLE_EQ(r.exact_match_accuracy, 0.0);
  EXPECT_THROW(agreement_metrics({PredictionSet("zz", {0})}, ann), DataError);
}

GeneratorSpec SmallSpec() {
  GeneratorSpec spec;
  spec.n = 400;
  spec.seed = 21;
  return spec;
}

TEST(Sweep, ShapeAndOrder) {
  const auto split = generate_split(SmallSpec(), 400, 300);
  const auto report = sweep(split.calibration, split.test, SweepConfig{});
  ASSERT_EQ(report.rows.size(), 12u);
  EXPECT_EQ(report.dataset, split.test.name);
  const std::vector<std::string> methods{"lac", "aps", "raps"};
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    EXPECT_EQ(report.rows[i].method, methods[i / 4]);
    EXPECT_DOUBLE_EQ(report.rows[i].alpha, kDefaultAlphas[i % 4]);
    EXPECT_GE(report.rows[i].cc, report.rows[i].ssc);
  }
}

TEST(Sweep, DeterministicForFixedSeed) {
  const auto split = generate_split(SmallSpec(), 400, 300);
  SweepConfig config;
  config.seed = 4;
  EXPECT_EQ(sweep(split.calibration, split.test, config).rows,
            sweep(split.calibration, split.test, config).rows);
}

TEST(Sweep, RequiresAnnotations) {
  auto split = generate_split(SmallSpec(), 200, 100);
  split.test.annotations.clear();
  EXPECT_THROW(sweep(split.calibration, split.test, SweepConfig{}), DataError);
}

TEST(ResolveConsensus, TrueLabelFirstThenVote) {
  Dataset d{"d", LabelSpace({"a", "b"}), {}, {}};
  d.records.push_back({"x", {0.5, 0.5}, 1});
  d.records.push_back({"y", {0.5, 0.5}, std::nullopt});
  d.records.push_back({"z", {0.5, 0.5}, std::nullopt});
  d.annotations["x"] = AnnotationSet{"x", {{"e1", 0}, {"e2", 0}}, std::nullopt};
  d.annotations["y"] = AnnotationSet{"y", {{"e1", 0}, {"e2", 0}}, std::nullopt};
  d.annotations["z"] = AnnotationSet{"z", {{"e1", 0}, {"e2", 1}}, std::nullopt};
  const auto c = resolve_consensus(d, 2);
  EXPECT_EQ(c.at("x"), 1u);
  EXPECT_EQ(c.at("y"), 0u);
  EXPECT_FALSE(c.contains("z"));
}

}  // namespace
}  // namespace cpkit
