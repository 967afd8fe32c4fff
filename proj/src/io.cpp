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

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "cpkit/errors.hpp"

namespace cpkit::io {

std::string format_number(double v) {
  if (v == kInfiniteQuantile) return "inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw InvariantError("number formatting failed");
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

namespace {

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view text, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail_at(line, "non-numeric cell '" + std::string(text) + "'");
  }
  return v;
}

std::size_t parse_size(std::string_view text, std::size_t line) {
  std::size_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail_at(line, "not a non-negative integer '" + std::string(text) + "'");
  }
  return v;
}

// Calls fn(line_number, fields) for every non-blank line after the header.
template <typename Fn>
std::vector<std::string> for_each_row(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw DataError("empty file");
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    fn(line_no, split_csv_line(line));
  }
  return header;
}

std::vector<std::string> read_header(std::istream& in, std::size_t& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    return split_csv_line(line);
  }
  throw DataError("empty file");
}

template <typename Fn>
void for_each_data_row(std::istream& in, std::size_t line_no, Fn&& fn) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    fn(line_no, split_csv_line(line));
  }
}

std::string dataset_name(const std::filesystem::path& path) { return path.stem().string(); }

}  // namespace

// ---- softmax CSV ---------------------------------------------------------

Dataset read_softmax_csv(std::istream& in, std::string name,
                         const std::optional<LabelSpace>& declared) {
  std::size_t line_no = 0;
  const auto header = read_header(in, line_no);
  if (header.size() < 3 || header[0] != "sample_id") {
    fail_at(line_no, "malformed header, expected sample_id,p_<class>,...[,true_label]");
  }
  const bool has_label = header.back() == "true_label";
  const std::size_t n_prob = header.size() - 1 - (has_label ? 1 : 0);
  std::vector<std::string> file_classes;
  for (std::size_t i = 1; i <= n_prob; ++i) {
    if (header[i].size() < 3 || header[i].rfind("p_", 0) != 0) {
      fail_at(line_no, "malformed header column '" + header[i] + "', expected p_<class>");
    }
    file_classes.push_back(header[i].substr(2));
  }
  std::optional<LabelSpace> file_space;
  try {
    file_space.emplace(file_classes);
  } catch (const DataError& e) {
    fail_at(line_no, std::string("malformed header: ") + e.what());
  }
  const LabelSpace& ls = declared ? *declared : *file_space;
  // column j of the file holds class to_declared[j]
  std::vector<ClassIndex> to_declared(n_prob);
  if (declared) {
    if (declared->size() != n_prob) {
      fail_at(line_no, "header has " + std::to_string(n_prob) + " classes, expected " +
                           std::to_string(declared->size()));
    }
    for (std::size_t j = 0; j < n_prob; ++j) {
      auto idx = declared->index_of(file_classes[j]);
      if (!idx) fail_at(line_no, "header class '" + file_classes[j] + "' not in label space");
      to_declared[j] = *idx;
    }
  } else {
    for (std::size_t j = 0; j < n_prob; ++j) to_declared[j] = j;
  }

  Dataset d{std::move(name), ls, {}, {}};
  std::set<std::string, std::less<>> seen;
  for_each_data_row(in, line_no, [&](std::size_t line, const std::vector<std::string>& f) {
    if (f.size() != header.size()) {
      fail_at(line, "expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(f.size()));
    }
    SoftmaxRecord r;
    r.sample_id = f[0];
    if (r.sample_id.empty()) fail_at(line, "empty sample_id");
    if (!seen.insert(r.sample_id).second) fail_at(line, "duplicate id " + r.sample_id);
    r.probs.assign(n_prob, 0.0);
    for (std::size_t j = 0; j < n_prob; ++j) {
      r.probs[to_declared[j]] = parse_double(f[j + 1], line);
    }
    if (!renormalize(r.probs)) {
      double sum = 0.0;
      for (double p : r.probs) sum += p;
      fail_at(line, "probs sum " + format_number(sum) + " beyond tolerance 1e-3");
    }
    if (auto problem = check_probs(r.probs, n_prob); !problem.empty()) fail_at(line, problem);
    if (has_label && !f.back().empty()) {
      auto idx = ls.index_of(f.back());
      if (!idx) fail_at(line, "unknown true_label '" + f.back() + "'");
      r.true_label = *idx;
    }
    d.records.push_back(std::move(r));
  });
  return d;
}

Dataset parse_softmax_csv(const std::filesystem::path& path,
                          const std::optional<LabelSpace>& declared) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_softmax_csv(in, dataset_name(path), declared);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string softmax_csv(const Dataset& d) {
  const LabelSpace& ls = d.label_space;
  bool any_label = false;
  for (const auto& r : d.records) any_label |= r.true_label.has_value();
  std::string out = "sample_id";
  for (const auto& c : ls.classes()) out += "," + csv_field("p_" + c);
  if (any_label) out += ",true_label";
  out += '\n';
  for (const auto& r : d.records) {
    out += csv_field(r.sample_id);
    for (double p : r.probs) out += "," + format_number(p);
    if (any_label) out += "," + (r.true_label ? csv_field(ls.name(*r.true_label)) : "");
    out += '\n';
  }
  return out;
}

// ---- annotations CSV -----------------------------------------------------

namespace {

void check_annotation_header(const std::vector<std::string>& header) {
  if (header.size() != 3 || header[0] != "sample_id" || header[1] != "annotator_id" ||
      header[2] != "label") {
    throw DataError("line 1: malformed header, expected sample_id,annotator_id,label");
  }
}

}  // namespace

AnnotationMap read_annotations_csv(std::istream& in, const LabelSpace& ls, bool merge) {
  AnnotationMap out;
  std::size_t line_no = 0;
  check_annotation_header(read_header(in, line_no));
  std::size_t rows = 0;
  for_each_data_row(in, line_no, [&](std::size_t line, const std::vector<std::string>& f) {
    if (f.size() != 3) fail_at(line, "expected 3 fields, got " + std::to_string(f.size()));
    if (f[0].empty()) fail_at(line, "empty sample_id");
    std::string label = f[2];
    if (merge) {
      if (!bethesda_merge_table().knows(label)) fail_at(line, "unknown label '" + label + "'");
      label = merge_labels(label);
    }
    auto idx = ls.index_of(label);
    if (!idx) fail_at(line, "unknown label '" + f[2] + "'");
    auto& a = out[f[0]];
    a.sample_id = f[0];
    a.labels.push_back({f[1], *idx});
    ++rows;
  });
  if (rows == 0) throw DataError("annotation file has no rows");
  return out;
}

AnnotationMap parse_annotations_csv(const std::filesystem::path& path, const LabelSpace& ls,
                                    bool merge) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_annotations_csv(in, ls, merge);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> annotation_label_names(const std::filesystem::path& path, bool merge) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::set<std::string> names;
  const auto header = for_each_row(in, [&](std::size_t line, const std::vector<std::string>& f) {
    if (f.size() != 3) fail_at(line, "expected 3 fields, got " + std::to_string(f.size()));
    if (merge && !bethesda_merge_table().knows(f[2])) {
      fail_at(line, "unknown label '" + f[2] + "'");
    }
    names.insert(merge ? merge_labels(f[2]) : f[2]);
  });
  check_annotation_header(header);
  return {names.begin(), names.end()};
}

std::string annotations_csv(const AnnotationMap& annotations, const LabelSpace& ls) {
  std::string out = "sample_id,annotator_id,label\n";
  for (const auto& [id, a] : annotations) {
    for (const auto& l : a.labels) {
      out += csv_field(id) + "," + csv_field(l.annotator_id) + "," + csv_field(ls.name(l.label)) +
             "\n";
    }
  }
  return out;
}

// ---- prediction sets CSV -------------------------------------------------

std::string prediction_sets_csv(const std::vector<PredictionSet>& sets, const LabelSpace& ls) {
  std::string out = "sample_id,width,members\n";
  for (const auto& s : sets) {
    std::string members;
    for (std::size_t i = 0; i < s.members().size(); ++i) {
      if (i) members += ';';
      members += ls.name(s.members()[i]);
    }
    out += csv_field(s.sample_id()) + "," + std::to_string(s.width()) + "," +
           csv_field(members) + "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split_members(std::string_view field) {
  std::vector<std::string> out;
  if (field.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = field.find(';', start);
    out.emplace_back(field.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::vector<PredictionSet> read_prediction_sets_csv(std::istream& in, const LabelSpace& ls) {
  std::size_t line_no = 0;
  const auto header = read_header(in, line_no);
  if (header != std::vector<std::string>{"sample_id", "width", "members"}) {
    fail_at(line_no, "malformed header, expected sample_id,width,members");
  }
  std::vector<PredictionSet> out;
  std::set<std::string> seen;
  for_each_data_row(in, line_no, [&](std::size_t line, const std::vector<std::string>& f) {
    if (f.size() != 3) fail_at(line, "expected 3 fields, got " + std::to_string(f.size()));
    if (!seen.insert(f[0]).second) fail_at(line, "duplicate id " + f[0]);
    const std::size_t width = parse_size(f[1], line);
    std::vector<ClassIndex> members;
    for (const auto& name : split_members(f[2])) {
      auto idx = ls.index_of(name);
      if (!idx) fail_at(line, "unknown class '" + name + "'");
      members.push_back(*idx);
    }
    PredictionSet s(f[0], members);
    if (s.width() != members.size() || s.width() != width) {
      fail_at(line, "width " + std::to_string(width) + " does not match members");
    }
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<PredictionSet> parse_prediction_sets_csv(const std::filesystem::path& path,
                                                     const LabelSpace& ls) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_prediction_sets_csv(in, ls);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> prediction_set_label_names(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::set<std::string> names;
  for_each_row(in, [&](std::size_t line, const std::vector<std::string>& f) {
    if (f.size() != 3) fail_at(line, "expected 3 fields, got " + std::to_string(f.size()));
    for (auto& m : split_members(f[2])) names.insert(std::move(m));
  });
  return {names.begin(), names.end()};
}

// ---- consensus CSV -------------------------------------------------------

std::string consensus_csv(const std::vector<ConsensusRow>& rows, const LabelSpace& ls) {
  std::string out = "sample_id,consensus_label";
  for (const auto& c : ls.classes()) out += "," + csv_field("votes_" + c);
  out += '\n';
  for (const auto& r : rows) {
    out += csv_field(r.sample_id) + "," +
           (r.label ? csv_field(ls.name(*r.label)) : std::string(kExcluded));
    for (std::size_t v : r.votes) out += "," + std::to_string(v);
    out += '\n';
  }
  return out;
}

ParsedConsensus parse_consensus_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::size_t line_no = 0;
  const auto header = read_header(in, line_no);
  if (header.size() < 2 || header[0] != "sample_id" || header[1] != "consensus_label") {
    throw DataError(path.string() + ": line 1: malformed header, expected "
                    "sample_id,consensus_label[,votes_<class>...]");
  }
  ParsedConsensus parsed;
  if (header.size() > 2) {
    std::vector<std::string> classes;
    for (std::size_t i = 2; i < header.size(); ++i) {
      if (header[i].rfind("votes_", 0) != 0) {
        throw DataError(path.string() + ": line 1: unexpected column " + header[i]);
      }
      classes.push_back(header[i].substr(6));
    }
    parsed.label_space.emplace(std::move(classes));
  }
  for_each_data_row(in, line_no, [&](std::size_t line, const std::vector<std::string>& f) {
    if (f.size() != header.size()) {
      throw DataError(path.string() + ": line " + std::to_string(line) + ": expected " +
                      std::to_string(header.size()) + " fields");
    }
    if (f[1] == kExcluded) return;
    if (parsed.label_space && !parsed.label_space->index_of(f[1])) {
      throw DataError(path.string() + ": line " + std::to_string(line) + ": unknown label '" +
                      f[1] + "'");
    }
    parsed.labels[f[0]] = f[1];
  });
  return parsed;
}

ConsensusMap to_consensus_map(const ParsedConsensus& parsed, const LabelSpace& ls) {
  ConsensusMap out;
  for (const auto& [id, name] : parsed.labels) out.emplace(id, ls.require_index(name));
  return out;
}

// ---- predictor JSON ------------------------------------------------------

json predictor_to_json(const CalibratedPredictor& p) {
  json j;
  j["method"] = std::string(method_name(p.method().variant));
  j["alpha"] = p.alpha();
  if (p.is_full_set()) {
    j["q_hat"] = "inf";
  } else {
    j["q_hat"] = p.q_hat();
  }
  if (p.method().raps) {
    j["lambda"] = p.method().raps->lambda;
    j["k_reg"] = p.method().raps->k_reg;
    j["raps_positive_part"] = p.method().raps->positive_part;
  }
  j["n_cal"] = p.n_cal();
  j["classes"] = p.label_space().classes();
  return j;
}

CalibratedPredictor predictor_from_json(const json& j) {
  try {
    const Method m = parse_method(j.at("method").get<std::string>());
    ConformalMethod cm{m, std::nullopt};
    if (m == Method::kRaps) {
      cm.raps = RapsParams{j.at("lambda").get<double>(), j.at("k_reg").get<std::size_t>(),
                           j.value("raps_positive_part", false)};
    }
    double q_hat;
    const auto& q = j.at("q_hat");
    if (q.is_string()) {
      if (q.get<std::string>() != "inf") throw DataError("q_hat string must be \"inf\"");
      q_hat = kInfiniteQuantile;
    } else {
      q_hat = q.get<double>();
    }
    return CalibratedPredictor(cm, j.at("alpha").get<double>(), q_hat,
                               j.at("n_cal").get<std::size_t>(),
                               LabelSpace(j.at("classes").get<std::vector<std::string>>()));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed predictor JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid predictor JSON: ") + e.what());
  }
}

CalibratedPredictor load_predictor(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return predictor_from_json(j);
}

// ---- reports -------------------------------------------------------------

std::string report_csv(const EvaluationReport& report) {
  std::string out =
      "method,model,alpha,cc,ssc,mean_width,mean_precision,mean_recall,mean_f1,"
      "mean_jaccard,exact_match\n";
  for (const auto& r : report.rows) {
    out += csv_field(r.method) + "," + csv_field(r.model) + "," + format_number(r.alpha) + "," +
           format_number(r.cc) + "," + format_number(r.ssc) + "," +
           format_number(r.mean_width) + "," + format_number(r.mean_precision) + "," +
           format_number(r.mean_recall) + "," + format_number(r.mean_f1) + "," +
           format_number(r.mean_jaccard) + "," + format_number(r.exact_match) + "\n";
  }
  return out;
}

json report_json(const EvaluationReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"method", r.method},
                    {"model", r.model},
                    {"alpha", r.alpha},
                    {"cc", r.cc},
                    {"ssc", r.ssc},
                    {"mean_width", r.mean_width},
                    {"mean_precision", r.mean_precision},
                    {"mean_recall", r.mean_recall},
                    {"mean_f1", r.mean_f1},
                    {"mean_jaccard", r.mean_jaccard},
                    {"exact_match", r.exact_match}});
  }
  return {{"dataset", report.dataset}, {"rows", rows}};
}

std::string metric_table_csv(const std::vector<std::pair<std::string, double>>& rows) {
  std::string out = "metric,value\n";
  for (const auto& [name, value] : rows) out += name + "," + format_number(value) + "\n";
  return out;
}

json coverage_json(const CoverageReport& r) {
  json groups = json::array();
  for (const auto& [size, g] : r.per_size_coverage) {
    groups.push_back({{"size", size}, {"coverage", g.coverage}, {"count", g.count}});
  }
  return {{"cc", r.cc},
          {"ssc", r.ssc},
          {"mean_width", r.mean_width},
          {"n", r.n},
          {"per_size_coverage", groups}};
}

json agreement_json(const AgreementReport& r) {
  return {{"mean_precision", r.mean_precision},
          {"mean_recall", r.mean_recall},
          {"mean_f1", r.mean_f1},
          {"mean_jaccard", r.mean_jaccard},
          {"exact_match", r.exact_match_accuracy},
          {"n", r.n},
          {"n_empty_sets", r.n_empty_sets},
          {"n_zero_f1", r.n_zero_f1}};
}

json kappa_json(const KappaResult& k) {
  json per_item = json::object();
  for (const auto& [m, count] : k.n_raters_per_item) per_item[std::to_string(m)] = count;
  return {{"kappa", k.kappa},
          {"ci_low", k.ci_low},
          {"ci_high", k.ci_high},
          {"band", std::string(agreement_band(k.kappa))},
          {"n_items", k.n_items},
          {"raters", k.raters},
          {"n_excluded", k.n_excluded},
          {"n_resamples", k.n_resamples},
          {"n_raters_per_item", per_item}};
}

std::string width_profile_csv(const WidthProfile& profile) {
  std::string out = "sigma,n,mean_width,full_set_fraction";
  const std::size_t bins =
      profile.per_level.empty() ? 0 : profile.per_level.front().stats.histogram.size();
  for (std::size_t w = 0; w < bins; ++w) out += ",width_" + std::to_string(w);
  out += '\n';
  for (const auto& l : profile.per_level) {
    out += format_number(l.sigma) + "," + std::to_string(l.stats.n) + "," +
           format_number(l.stats.mean_width) + "," + format_number(l.stats.full_set_fraction);
    for (std::size_t c : l.stats.histogram) out += "," + std::to_string(c);
    out += '\n';
  }
  return out;
}

namespace {

json width_stats_json(const WidthStats& s) {
  return {{"n", s.n},
          {"mean_width", s.mean_width},
          {"full_set_fraction", s.full_set_fraction},
          {"histogram", s.histogram}};
}

}  // namespace

json width_profile_json(const WidthProfile& profile) {
  json levels = json::array();
  for (const auto& l : profile.per_level) {
    json entry = width_stats_json(l.stats);
    entry["sigma"] = l.sigma;
    levels.push_back(std::move(entry));
  }
  return {{"trend_correlation", profile.trend_correlation},
          {"degenerate", profile.degenerate},
          {"levels", levels}};
}

json ood_comparison_json(const OodComparison& c) {
  return {{"ind", width_stats_json(c.ind)},
          {"ood", width_stats_json(c.ood)},
          {"mean_width_difference", c.mean_width_difference}};
}

// ---- synthetic fixtures --------------------------------------------------

json spec_to_json(const GeneratorSpec& spec) {
  return {{"K", spec.k},
          {"n", spec.n},
          {"class_prior", spec.class_prior},
          {"confidence", spec.confidence},
          {"noise_sigma", spec.noise_sigma},
          {"annotators", spec.annotators},
          {"seed", spec.seed},
          {"class_names", spec.class_names},
          {"name", spec.name}};
}

GeneratorSpec spec_from_json(const json& j) {
  try {
    GeneratorSpec s;
    s.k = j.value("K", s.k);
    s.n = j.value("n", s.n);
    s.class_prior = j.value("class_prior", s.class_prior);
    s.confidence = j.value("confidence", s.confidence);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.annotators = j.value("annotators", s.annotators);
    s.seed = j.value("seed", s.seed);
    s.class_names = j.value("class_names", s.class_names);
    s.name = j.value("name", s.name);
    if (auto problem = check_spec(s); !problem.empty()) {
      throw DataError("invalid generator spec: " + problem);
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed generator spec: ") + e.what());
  }
}

NoiseSeries load_noise_manifest(const std::filesystem::path& path,
                                const std::optional<LabelSpace>& declared) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  const json& levels = j.is_array() ? j : j.value("levels", json::array());
  if (!levels.is_array() || levels.empty()) {
    throw DataError(path.string() + ": manifest lists no levels");
  }
  NoiseSeries series;
  const auto base = path.parent_path();
  for (const auto& level : levels) {
    double sigma;
    std::filesystem::path csv;
    try {
      sigma = level.at("sigma").get<double>();
      csv = level.at("softmax_csv_path").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError(path.string() + ": malformed level entry: " + e.what());
    }
    if (csv.is_relative()) csv = base / csv;
    series.levels.push_back({sigma, parse_softmax_csv(csv, declared)});
  }
  if (auto problem = check_noise_series(series); !problem.empty()) {
    throw DataError(path.string() + ": " + problem);
  }
  return series;
}

}  // namespace cpkit::io
