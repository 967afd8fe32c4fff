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

#ifndef CPKIT_CORE_HPP_
#define CPKIT_CORE_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cpkit {

using ClassIndex = std::size_t;

// Probability rows may drift from the simplex by this much in input files
// and still be accepted (after renormalization).
inline constexpr double kRenormalizeTolerance = 1e-3;
// A stored record must sum to one within this tolerance.
inline constexpr double kSimplexTolerance = 1e-6;

// Ordered, named set of K >= 2 classes. Index order is the declaration order.
class LabelSpace {
 public:
  // Throws DataError if the names are not unique and non-empty or K < 2.
  explicit LabelSpace(std::vector<std::string> classes);

  std::size_t size() const { return classes_.size(); }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::string& name(ClassIndex index) const { return classes_.at(index); }
  std::optional<ClassIndex> index_of(std::string_view name) const;
  // Like index_of, but throws DataError naming the unknown label.
  ClassIndex require_index(std::string_view name) const;

  bool operator==(const LabelSpace& other) const {
    return classes_ == other.classes_;
  }

 private:
  std::vector<std::string> classes_;
  std::map<std::string, ClassIndex, std::less<>> index_;
};

struct SoftmaxRecord {
  std::string sample_id;
  std::vector<double> probs;
  std::optional<ClassIndex> true_label;

  bool operator==(const SoftmaxRecord&) const = default;
};

struct Annotation {
  std::string annotator_id;
  ClassIndex label = 0;

  bool operator==(const Annotation&) const = default;
};

// Expert labels for one sample (the multiset y0) and, optionally, the
// derived consensus label (y1). An annotator who skipped the sample simply
// has no entry.
struct AnnotationSet {
  std::string sample_id;
  std::vector<Annotation> labels;
  std::optional<ClassIndex> consensus;

  // Distinct labels, ascending.
  std::vector<ClassIndex> unique_labels() const;

  bool operator==(const AnnotationSet&) const = default;
};

using AnnotationMap = std::map<std::string, AnnotationSet>;

// Members are kept sorted ascending without duplicates.
class PredictionSet {
 public:
  PredictionSet() = default;
  PredictionSet(std::string sample_id, std::vector<ClassIndex> members);

  const std::string& sample_id() const { return sample_id_; }
  const std::vector<ClassIndex>& members() const { return members_; }
  std::size_t width() const { return members_.size(); }
  bool contains(ClassIndex c) const;

  bool operator==(const PredictionSet&) const = default;

 private:
  std::string sample_id_;
  std::vector<ClassIndex> members_;
};

struct Dataset {
  std::string name;
  LabelSpace label_space;
  std::vector<SoftmaxRecord> records;
  // Empty when the dataset carries no expert annotations.
  AnnotationMap annotations;

  bool has_annotations() const { return !annotations.empty(); }
  std::size_t size() const { return records.size(); }

  bool operator==(const Dataset&) const = default;
};

struct Violation {
  std::string sample_id;
  std::string rule;
};

// Checks every type invariant of the dataset against `ls`. Returns one entry
// per violation; an empty result means the dataset is valid.
std::vector<Violation> validate_dataset(const Dataset& d, const LabelSpace& ls);

// Checks a single probability row. Returns an empty string when valid,
// otherwise a description of the first problem found.
std::string check_probs(std::span<const double> probs, std::size_t k);

// Renormalizes `probs` in place when its sum is off by at most
// kRenormalizeTolerance. Returns false (and leaves `probs` untouched) when
// the deviation is larger or an entry is not finite.
bool renormalize(std::vector<double>& probs);

// Raw label -> target class name. Target classes map to themselves.
class LabelMergeTable {
 public:
  LabelMergeTable(std::map<std::string, std::string> mapping);

  // Throws DataError naming `raw` when it is neither a source nor a target.
  const std::string& merge(std::string_view raw) const;
  bool knows(std::string_view raw) const;

 private:
  std::map<std::string, std::string, std::less<>> mapping_;
};

// NILM, LSIL := {LSIL, ASC-US}, HSIL := {ASC-H, HSIL, SCC}, Artefact.
const LabelMergeTable& bethesda_merge_table();
// The four-class label space produced by bethesda_merge_table().
LabelSpace bethesda_label_space();

std::string merge_labels(std::string_view raw_label,
                         const LabelMergeTable& mapping = bethesda_merge_table());

}  // namespace cpkit

#endif  // CPKIT_CORE_HPP_
