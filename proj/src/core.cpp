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
#include <cmath>
#include <set>
#include <sstream>

#include "cpkit/errors.hpp"

namespace cpkit {

LabelSpace::LabelSpace(std::vector<std::string> classes)
    : classes_(std::move(classes)) {
  if (classes_.size() < 2) {
    throw DataError("label space needs at least 2 classes, got " +
                    std::to_string(classes_.size()));
  }
  for (ClassIndex i = 0; i < classes_.size(); ++i) {
    if (classes_[i].empty()) throw DataError("empty class name at index " + std::to_string(i));
    if (!index_.emplace(classes_[i], i).second) {
      throw DataError("duplicate class name " + classes_[i]);
    }
  }
}

std::optional<ClassIndex> LabelSpace::index_of(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ClassIndex LabelSpace::require_index(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) throw DataError("unknown label " + std::string(name));
  return *idx;
}

std::vector<ClassIndex> AnnotationSet::unique_labels() const {
  std::vector<ClassIndex> out;
  out.reserve(labels.size());
  for (const auto& a : labels) out.push_back(a.label);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PredictionSet::PredictionSet(std::string sample_id, std::vector<ClassIndex> members)
    : sample_id_(std::move(sample_id)), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

bool PredictionSet::contains(ClassIndex c) const {
  return std::binary_search(members_.begin(), members_.end(), c);
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string check_probs(std::span<const double> probs, std::size_t k) {
  if (probs.size() != k) {
    return "expected " + std::to_string(k) + " probabilities, got " +
           std::to_string(probs.size());
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double p = probs[j];
    if (!std::isfinite(p)) return "probs[" + std::to_string(j) + "] not finite";
    if (p < 0.0 || p > 1.0) {
      return "probs[" + std::to_string(j) + "] = " + format_double(p) + " outside [0,1]";
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    return "probs sum " + format_double(sum) + (sum > 1.0 ? " > " : " < ") + "tolerance";
  }
  return {};
}

bool renormalize(std::vector<double>& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) return false;
    sum += p;
  }
  const double deviation = std::abs(sum - 1.0);
  if (deviation > kRenormalizeTolerance) return false;
  // Rows already on the simplex up to float noise are kept verbatim so that
  // serialization round trips are exact.
  if (deviation > 1e-9) {
    for (double& p : probs) p /= sum;
  }
  return true;
}

std::vector<Violation> validate_dataset(const Dataset& d, const LabelSpace& ls) {
  std::vector<Violation> out;
  std::set<std::string, std::less<>> seen;
  for (const auto& r : d.records) {
    if (!seen.insert(r.sample_id).second) {
      out.push_back({r.sample_id, "duplicate id " + r.sample_id});
    }
    if (r.sample_id.empty()) out.push_back({r.sample_id, "empty sample id"});
    if (auto problem = check_probs(r.probs, ls.size()); !problem.empty()) {
      out.push_back({r.sample_id, std::move(problem)});
    }
    if (r.true_label && *r.true_label >= ls.size()) {
      out.push_back({r.sample_id, "true_label " + std::to_string(*r.true_label) +
                                      " outside label space"});
    }
  }
  for (const auto& [id, a] : d.annotations) {
    if (a.sample_id != id) {
      out.push_back({id, "annotation keyed as " + id + " but names " + a.sample_id});
    }
    if (!seen.contains(id)) out.push_back({id, "annotated sample " + id + " has no record"});
    if (a.labels.empty()) out.push_back({id, "annotation set is empty"});
    for (const auto& l : a.labels) {
      if (l.label >= ls.size()) {
        out.push_back({id, "annotation label " + std::to_string(l.label) +
                               " outside label space"});
      }
    }
    if (a.consensus && *a.consensus >= ls.size()) {
      out.push_back({id, "consensus outside label space"});
    }
  }
  return out;
}

LabelMergeTable::LabelMergeTable(std::map<std::string, std::string> mapping) {
  for (auto& [from, to] : mapping) {
    mapping_.emplace(to, to);
    mapping_.insert_or_assign(from, to);
  }
  for (const auto& [from, to] : mapping_) {
    if (mapping_.at(to) != to) {
      throw DataError("merge table maps target " + to + " onward to " + mapping_.at(to));
    }
  }
}

const std::string& LabelMergeTable::merge(std::string_view raw) const {
  auto it = mapping_.find(raw);
  if (it == mapping_.end()) throw DataError("unknown label " + std::string(raw));
  return it->second;
}

bool LabelMergeTable::knows(std::string_view raw) const {
  return mapping_.find(raw) != mapping_.end();
}

const LabelMergeTable& bethesda_merge_table() {
  static const LabelMergeTable table({
      {"NILM", "NILM"},
      {"LSIL", "LSIL"},
      {"ASC-US", "LSIL"},
      {"ASC-H", "HSIL"},
      {"HSIL", "HSIL"},
      {"SCC", "HSIL"},
      {"Artefact", "Artefact"},
  });
  return table;
}

LabelSpace bethesda_label_space() {
  return LabelSpace({"NILM", "LSIL", "HSIL", "Artefact"});
}

std::string merge_labels(std::string_view raw_label, const LabelMergeTable& mapping) {
  return mapping.merge(raw_label);
}

}  // namespace cpkit
