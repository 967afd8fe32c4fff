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

#include "cpkit/core.hpp"

#include <algorithm>

#include "gtest/gtest.h"

#include "cpkit/errors.hpp"

namespace cpkit {
namespace {

LabelSpace Four() { return bethesda_label_space(); }

Dataset OneRecord(std::vector<double> probs) {
  return Dataset{"d", Four(), {{"t1", std::move(probs), 0}}, {}};
}

bool HasRule(const std::vector<Violation>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const Violation& x) { return x.rule.find(needle) != std::string::npos; });
}

TEST(LabelSpace, IndexNameBijection) {
  const LabelSpace ls = Four();
  ASSERT_EQ(ls.size(), 4u);
  for (ClassIndex i = 0; i < ls.size(); ++i) EXPECT_EQ(ls.index_of(ls.name(i)), i);
  EXPECT_FALSE(ls.index_of("SCC").has_value());
  EXPECT_THROW(ls.require_index("SCC"), DataError);
}

TEST(LabelSpace, RejectsInvalidDeclarations) {
  EXPECT_THROW(LabelSpace({"only"}), DataError);
  EXPECT_THROW(LabelSpace({"a", "a"}), DataError);
  EXPECT_THROW(LabelSpace({"a", ""}), DataError);
}

TEST(ValidateDataset, ExactSimplexPointIsValid) {
  EXPECT_TRUE(validate_dataset(OneRecord({0.5, 0.5, 0.0, 0.0}), Four()).empty());
}

TEST(ValidateDataset, SumAboveToleranceIsViolation) {
  const auto v = validate_dataset(OneRecord({0.5, 0.6, 0.0, 0.0}), Four());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].sample_id, "t1");
  EXPECT_EQ(v[0].rule, "probs sum 1.1 > tolerance");
}

TEST(ValidateDataset, DuplicateIds) {
  Dataset d = OneRecord({1.0, 0.0, 0.0, 0.0});
  d.records.push_back(d.records.front());
  const auto v = validate_dataset(d, Four());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "duplicate id t1");
}

TEST(ValidateDataset, EntryRangeLengthAndLabels) {
  EXPECT_TRUE(HasRule(validate_dataset(OneRecord({1.2, -0.2, 0.0, 0.0}), Four()), "outside [0,1]"));
  EXPECT_TRUE(HasRule(validate_dataset(OneRecord({0.5, 0.5}), Four()), "expected 4"));
  Dataset d = OneRecord({1.0, 0.0, 0.0, 0.0});
  d.records[0].true_label = 7;
  EXPECT_TRUE(HasRule(validate_dataset(d, Four()), "true_label"));
}

TEST(ValidateDataset, AnnotationsMustReferenceRecords) {
  Dataset d = OneRecord({1.0, 0.0, 0.0, 0.0});
  d.annotations["ghost"] = AnnotationSet{"ghost", {{"e1", 0}}, std::nullopt};
  d.annotations["t1"] = AnnotationSet{"t1", {}, 9};
  const auto v = validate_dataset(d, Four());
  EXPECT_TRUE(HasRule(v, "has no record"));
  EXPECT_TRUE(HasRule(v, "annotation set is empty"));
  EXPECT_TRUE(HasRule(v, "consensus outside"));
}

TEST(Renormalize, WithinToleranceOnly) {
  std::vector<double> near{0.6, 0.3, 0.08, 0.0205};  // sums to 1.0005
  ASSERT_TRUE(renormalize(near));
  double sum = 0;
  for (double p : near) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);

  std::vector<double> far{0.6, 0.3, 0.2, 0.1};
  const auto before = far;
  EXPECT_FALSE(renormalize(far));
  EXPECT_EQ(far, before);
}

TEST(MergeLabels, BethesdaMerges) {
  EXPECT_EQ(merge_labels("ASC-US"), "LSIL");
  EXPECT_EQ(merge_labels("SCC"), "HSIL");
  EXPECT_EQ(merge_labels("ASC-H"), "HSIL");
  EXPECT_EQ(merge_labels("NILM"), "NILM");
}

TEST(MergeLabels, UnknownLabelNamesOffender) {
  try {
    merge_labels("XYZ");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("XYZ"), std::string::npos);
  }
}

TEST(MergeLabels, Idempotent) {
  for (const char* raw : {"NILM", "LSIL", "ASC-US", "ASC-H", "HSIL", "SCC", "Artefact"}) {
    const std::string once = merge_labels(raw);
    EXPECT_EQ(merge_labels(once), once) << raw;
    EXPECT_TRUE(bethesda_label_space().index_of(once).has_value()) << raw;
  }
}

TEST(MergeLabels, TableRejectsChains) {
  EXPECT_THROW(LabelMergeTable({{"a", "b"}, {"b", "c"}}), DataError);
}

TEST(PredictionSet, SortsAndDeduplicates) {
  PredictionSet s("x", {3, 1, 1, 0});
  EXPECT_EQ(s.members(), (std::vector<ClassIndex>{0, 1, 3}));
  EXPECT_EQ(s.width(), 3u);
  EXPECT_TRUE(s.contains(3));
  EXPECT_FALSE(s.contains(2));
  EXPECT_EQ(PredictionSet("e", {}).width(), 0u);
}

TEST(AnnotationSet, UniqueLabels) {
  AnnotationSet a{"t", {{"e1", 2}, {"e2", 0}, {"e3", 2}}, std::nullopt};
  EXPECT_EQ(a.unique_labels(), (std::vector<ClassIndex>{0, 2}));
}

}  // namespace
}  // namespace cpkit
