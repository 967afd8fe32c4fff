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

#include "cpkit/io.hpp"

#include <functional>
#include <sstream>

#include "gtest/gtest.h"

#include "cpkit/errors.hpp"

namespace cpkit::io {
namespace {

const std::filesystem::path kData = CPKIT_TEST_DATA;

const std::string kHeader = "sample_id,p_NILM,p_LSIL,p_HSIL,p_Artefact,true_label\n";

Dataset Parse(const std::string& text, const std::optional<LabelSpace>& declared = std::nullopt) {
  std::istringstream in(text);
  return read_softmax_csv(in, "d", declared);
}

std::string ErrorOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

TEST(SoftmaxCsv, ParsesRow) {
  const Dataset d = Parse(kHeader + "t1,0.6,0.3,0.08,0.02,NILM\n");
  ASSERT_EQ(d.records.size(), 1u);
  EXPECT_EQ(d.records[0].sample_id, "t1");
  EXPECT_EQ(d.records[0].probs, (std::vector<double>{0.6, 0.3, 0.08, 0.02}));
  EXPECT_EQ(d.records[0].true_label, 0u);
  EXPECT_EQ(d.label_space, bethesda_label_space());
}

TEST(SoftmaxCsv, RenormalizesWithinTolerance) {
  const Dataset d = Parse(kHeader + "t1,0.6,0.3,0.08,0.0205,NILM\n");
  double sum = 0;
  for (double p : d.records[0].probs) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(SoftmaxCsv, ErrorsCarryLineNumbers) {
  const std::string sum = ErrorOf([] { Parse(kHeader + "t0,1,0,0,0,NILM\nt1,0.6,0.3,0.2,0.1,NILM\n"); });
  EXPECT_NE(sum.find("line 3"), std::string::npos) << sum;
  EXPECT_NE(sum.find("1.2"), std::string::npos) << sum;

  const std::string cell = ErrorOf([] { Parse(kHeader + "t1,0.6,abc,0.08,0.02,NILM\n"); });
  EXPECT_NE(cell.find("line 2"), std::string::npos) << cell;
  EXPECT_NE(cell.find("non-numeric"), std::string::npos) << cell;

  const std::string dup = ErrorOf([] { Parse(kHeader + "t1,1,0,0,0,\nt1,1,0,0,0,\n"); });
  EXPECT_NE(dup.find("line 3: duplicate id t1"), std::string::npos) << dup;

  const std::string header = ErrorOf([] { Parse("id,p_a,p_b\n"); });
  EXPECT_NE(header.find("line 1"), std::string::npos) << header;

  EXPECT_THROW(Parse(""), DataError);
  EXPECT_THROW(Parse(kHeader + "t1,1,0,0,0,SCC\n"), DataError);
}

TEST(SoftmaxCsv, DeclaredOrderPermutesColumns) {
  const LabelSpace declared({"HSIL", "NILM", "Artefact", "LSIL"});
  const Dataset d = Parse(kHeader + "t1,0.6,0.3,0.08,0.02,LSIL\n", declared);
  EXPECT_EQ(d.label_space, declared);
  EXPECT_EQ(d.records[0].probs, (std::vector<double>{0.08, 0.6, 0.02, 0.3}));
  EXPECT_EQ(d.records[0].true_label, 3u);
  EXPECT_THROW(Parse(kHeader + "t1,1,0,0,0,\n", LabelSpace({"a", "b", "c", "d"})), DataError);
}

TEST(SoftmaxCsv, NameIsFileStem) {
  EXPECT_EQ(parse_softmax_csv(kData / "calib.csv").name, "calib");
  EXPECT_THROW(parse_softmax_csv(kData / "missing.csv"), DataError);
}

TEST(AnnotationsCsv, MergesBethesdaLabels) {
  std::istringstream in("sample_id,annotator_id,label\nt1,e1,NILM\nt1,e2,ASC-US\nt2,e1,SCC\n");
  const auto m = read_annotations_csv(in, bethesda_label_space(), true);
  ASSERT_EQ(m.size(), 2u);
  const auto& t1 = m.at("t1");
  ASSERT_EQ(t1.labels.size(), 2u);
  EXPECT_EQ(t1.labels[0].annotator_id, "e1");
  EXPECT_EQ(t1.labels[0].label, 0u);
  EXPECT_EQ(t1.labels[1].annotator_id, "e2");
  EXPECT_EQ(t1.labels[1].label, 1u);
  EXPECT_EQ(m.at("t2").labels.size(), 1u);
  EXPECT_EQ(m.at("t2").labels[0].label, 2u);
}

TEST(AnnotationsCsv, Errors) {
  const std::string text = "sample_id,annotator_id,label\nt1,e1,NILM\nt1,e2,XYZ\n";
  for (bool merge : {true, false}) {
    std::istringstream in(text);
    const std::string e = ErrorOf([&] { read_annotations_csv(in, bethesda_label_space(), merge); });
    EXPECT_NE(e.find("XYZ"), std::string::npos) << e;
    EXPECT_NE(e.find("line 3"), std::string::npos) << e;
  }
  std::istringstream empty("");
  EXPECT_THROW(read_annotations_csv(empty, bethesda_label_space(), true), DataError);
  std::istringstream header_only("sample_id,annotator_id,label\n");
  EXPECT_THROW(read_annotations_csv(header_only, bethesda_label_space(), true), DataError);
  // Unmerged raw labels are outside the four-class space.
  std::istringstream raw("sample_id,annotator_id,label\nt1,e1,ASC-US\n");
  EXPECT_THROW(read_annotations_csv(raw, bethesda_label_space(), false), DataError);
}

TEST(RoundTrip, SoftmaxFixtures) {
  for (const char* name : {"calib.csv", "test.csv"}) {
    const std::string text = read_file(kData / name);
    EXPECT_EQ(softmax_csv(parse_softmax_csv(kData / name)), text) << name;
  }
}

TEST(RoundTrip, SyntheticDatasetIsExact) {
  GeneratorSpec spec;
  spec.n = 300;
  spec.noise_sigma = 1.5;
  const Dataset d = generate(spec);
  const std::string text = softmax_csv(d);
  const Dataset back = Parse(text);
  ASSERT_EQ(back.records.size(), d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    EXPECT_EQ(back.records[i].probs, d.records[i].probs);
    EXPECT_EQ(back.records[i].true_label, d.records[i].true_label);
  }
  EXPECT_EQ(softmax_csv(back), text);

  const std::string ann = annotations_csv(d.annotations, d.label_space);
  std::istringstream in(ann);
  EXPECT_EQ(annotations_csv(read_annotations_csv(in, d.label_space, false), d.label_space), ann);
}

TEST(RoundTrip, PredictionSets) {
  const LabelSpace ls = bethesda_label_space();
  const std::vector<PredictionSet> sets{PredictionSet("a", {}), PredictionSet("b", {0, 2}),
                                        PredictionSet("c", {0, 1, 2, 3})};
  const std::string text = prediction_sets_csv(sets, ls);
  EXPECT_EQ(text, "sample_id,width,members\na,0,\nb,2,NILM;HSIL\nc,4,NILM;LSIL;HSIL;Artefact\n");
  std::istringstream in(text);
  const auto back = read_prediction_sets_csv(in, ls);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EXPECT_EQ(back[i].sample_id(), sets[i].sample_id());
    EXPECT_EQ(back[i].members(), sets[i].members());
  }
  EXPECT_EQ(prediction_sets_csv(back, ls), text);

  std::istringstream bad("sample_id,width,members\na,3,NILM\n");
  EXPECT_THROW(read_prediction_sets_csv(bad, ls), DataError);
}

TEST(RoundTrip, PredictorJson) {
  const Dataset cal = parse_softmax_csv(kData / "calib.csv");
  std::vector<CalibratedPredictor> predictors{
      calibrate(cal, Method::kLac, 0.1, 0), calibrate(cal, Method::kAps, 0.2, 0),
      CalibratedPredictor(ConformalMethod::raps_with({0.01, 2, true}), 0.1, 0.93, 800,
                          bethesda_label_space()),
      CalibratedPredictor(ConformalMethod::lac(), 0.01, kInfiniteQuantile, 12,
                          bethesda_label_space())};
  for (const auto& p : predictors) {
    const json j = predictor_to_json(p);
    EXPECT_EQ(predictor_from_json(j), p);
    EXPECT_EQ(predictor_to_json(predictor_from_json(json::parse(j.dump()))).dump(), j.dump());
  }
  EXPECT_EQ(predictor_to_json(predictors[3])["q_hat"], "inf");
  EXPECT_THROW(predictor_from_json(json{{"method", "lac"}}), DataError);
}

TEST(ConsensusCsv, RoundTripAndExcluded) {
  const LabelSpace ls = bethesda_label_space();
  const auto annotations = parse_annotations_csv(kData / "test_annotations.csv", ls, true);
  const auto rows = build_consensus(annotations, ls, 2);
  const std::string text = consensus_csv(rows, ls);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "sample_id,consensus_label,votes_NILM,votes_LSIL,votes_HSIL,votes_Artefact");
  EXPECT_NE(text.find("t4,EXCLUDED,1,1,1,1"), std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "cpkit_io_consensus.csv";
  write_file(path, text);
  const auto parsed = parse_consensus_csv(path);
  ASSERT_TRUE(parsed.label_space.has_value());
  EXPECT_EQ(*parsed.label_space, ls);
  const auto map = to_consensus_map(parsed, ls);
  EXPECT_FALSE(map.contains("t4"));
  EXPECT_EQ(map.at("t1"), 0u);
  EXPECT_EQ(map.at("t3"), 2u);
  std::filesystem::remove(path);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(kInfiniteQuantile), "inf");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(SplitCsvLine, Quoting) {
  EXPECT_EQ(split_csv_line("a,\"b,c\",\"d\"\"e\",\r"),
            (std::vector<std::string>{"a", "b,c", "d\"e", ""}));
  EXPECT_EQ(csv_field("x,y"), "\"x,y\"");
}

TEST(SpecJson, RoundTrip) {
  GeneratorSpec spec;
  spec.k = 3;
  spec.class_prior = {0.2, 0.3, 0.5};
  spec.class_names = {"a", "b", "c"};
  spec.seed = 42;
  spec.noise_sigma = 0.5;
  EXPECT_EQ(spec_from_json(spec_to_json(spec)), spec);
  EXPECT_THROW(spec_from_json(json{{"K", 1}}), DataError);
}

TEST(Reports, ColumnOrder) {
  EvaluationReport r{"d", {{"aps", "m", 0.1, 0.9, 0.8, 1.5, 0.6, 0.7, 0.65, 0.5, 0.3}}};
  EXPECT_EQ(report_csv(r),
            "method,model,alpha,cc,ssc,mean_width,mean_precision,mean_recall,mean_f1,"
            "mean_jaccard,exact_match\naps,m,0.1,0.9,0.8,1.5,0.6,0.7,0.65,0.5,0.3\n");
  EXPECT_EQ(report_json(r)["rows"][0]["mean_width"], 1.5);
}

TEST(NoiseManifest, ResolvesRelativePaths) {
  const auto dir = std::filesystem::temp_directory_path() / "cpkit_io_manifest";
  std::filesystem::create_directories(dir / "levels");
  GeneratorSpec spec;
  spec.n = 50;
  const auto series = make_noise_series(spec, {0.0, 1.0});
  json levels = json::array();
  for (std::size_t i = 0; i < series.levels.size(); ++i) {
    const std::string rel = "levels/l" + std::to_string(i) + ".csv";
    write_file(dir / rel, softmax_csv(series.levels[i].dataset));
    levels.push_back({{"sigma", series.levels[i].sigma}, {"softmax_csv_path", rel}});
  }
  write_file(dir / "m.json", json{{"levels", levels}}.dump());
  const auto loaded = load_noise_manifest(dir / "m.json", std::nullopt);
  ASSERT_EQ(loaded.levels.size(), 2u);
  EXPECT_EQ(loaded.levels[1].sigma, 1.0);
  EXPECT_EQ(loaded.levels[1].dataset.records[3].probs, series.levels[1].dataset.records[3].probs);

  write_file(dir / "bad.json", json::array({{{"sigma", 1.0}, {"softmax_csv_path", "levels/l0.csv"}},
                                            {{"sigma", 0.5}, {"softmax_csv_path", "levels/l1.csv"}}})
                                   .dump());
  EXPECT_THROW(load_noise_manifest(dir / "bad.json", std::nullopt), DataError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace cpkit::io
