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

#ifndef CPKIT_IO_HPP_
#define CPKIT_IO_HPP_

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cpkit/conformal.hpp"
#include "cpkit/consensus.hpp"
#include "cpkit/core.hpp"
#include "cpkit/metrics.hpp"
#include "cpkit/synthetic.hpp"
#include "cpkit/uncertainty.hpp"

namespace cpkit::io {

using nlohmann::json;

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_field(std::string_view value);

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: truncate and write.
void write_file(const std::filesystem::path& path, std::string_view content);

// ---- softmax CSV ---------------------------------------------------------
// Header: sample_id,p_<class0>,...,p_<classK-1>[,true_label]
//
// Without `declared`, the class columns define the label space order. With
// it, the columns must name exactly the declared classes (any order) and the
// probabilities are permuted into declared order. Rows whose sum is off by
// at most 1e-3 are renormalized. Errors carry the 1-based line number.
Dataset read_softmax_csv(std::istream& in, std::string name,
                         const std::optional<LabelSpace>& declared = std::nullopt);
Dataset parse_softmax_csv(const std::filesystem::path& path,
                          const std::optional<LabelSpace>& declared = std::nullopt);
std::string softmax_csv(const Dataset& d);

// ---- annotations CSV -----------------------------------------------------
// Header: sample_id,annotator_id,label. Rows are grouped per sample in file
// order. With `merge`, raw Bethesda labels are mapped first.
AnnotationMap read_annotations_csv(std::istream& in, const LabelSpace& ls, bool merge);
AnnotationMap parse_annotations_csv(const std::filesystem::path& path, const LabelSpace& ls,
                                    bool merge);
// Distinct (merged) labels in the file, sorted; used to infer a label space.
std::vector<std::string> annotation_label_names(const std::filesystem::path& path, bool merge);
std::string annotations_csv(const AnnotationMap& annotations, const LabelSpace& ls);

// ---- prediction sets CSV -------------------------------------------------
// Header: sample_id,width,members; members are ';'-joined class names.
std::string prediction_sets_csv(const std::vector<PredictionSet>& sets, const LabelSpace& ls);
std::vector<PredictionSet> read_prediction_sets_csv(std::istream& in, const LabelSpace& ls);
std::vector<PredictionSet> parse_prediction_sets_csv(const std::filesystem::path& path,
                                                     const LabelSpace& ls);
// Distinct member names appearing in a sets file, sorted.
std::vector<std::string> prediction_set_label_names(const std::filesystem::path& path);

// ---- consensus CSV -------------------------------------------------------
// Header: sample_id,consensus_label,votes_<class0>,...; excluded samples
// carry EXCLUDED.
inline constexpr std::string_view kExcluded = "EXCLUDED";
std::string consensus_csv(const std::vector<ConsensusRow>& rows, const LabelSpace& ls);

struct ParsedConsensus {
  std::optional<LabelSpace> label_space;  // from votes_ columns, if present
  std::map<std::string, std::string> labels;  // excluded samples omitted
};
ParsedConsensus parse_consensus_csv(const std::filesystem::path& path);
ConsensusMap to_consensus_map(const ParsedConsensus& parsed, const LabelSpace& ls);

// ---- predictor JSON ------------------------------------------------------
// {method, alpha, q_hat ("inf" for the sentinel), lambda?, k_reg?,
//  raps_positive_part?, n_cal, classes[]}
json predictor_to_json(const CalibratedPredictor& p);
CalibratedPredictor predictor_from_json(const json& j);
CalibratedPredictor load_predictor(const std::filesystem::path& path);

// ---- reports -------------------------------------------------------------
std::string report_csv(const EvaluationReport& report);
json report_json(const EvaluationReport& report);

std::string metric_table_csv(const std::vector<std::pair<std::string, double>>& rows);
json coverage_json(const CoverageReport& r);
json agreement_json(const AgreementReport& r);
json kappa_json(const KappaResult& k);

std::string width_profile_csv(const WidthProfile& profile);
json width_profile_json(const WidthProfile& profile);
json ood_comparison_json(const OodComparison& c);

// ---- synthetic fixtures --------------------------------------------------
json spec_to_json(const GeneratorSpec& spec);
GeneratorSpec spec_from_json(const json& j);

// Manifest: {"levels": [{"sigma": s, "softmax_csv_path": "..."}, ...]}.
// Relative paths resolve against the manifest's directory.
NoiseSeries load_noise_manifest(const std::filesystem::path& path,
                                const std::optional<LabelSpace>& declared);

}  // namespace cpkit::io

#endif  // CPKIT_IO_HPP_
