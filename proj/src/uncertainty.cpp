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

#include "cpkit/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cpkit/errors.hpp"

namespace cpkit {

double aleatoric_capture(const std::vector<PredictionSet>& sets,
                         const AnnotationMap& annotations) {
  if (sets.empty()) throw DataError("aleatoric capture over zero prediction sets");
  std::size_t matches = 0;
  for (const auto& s : sets) {
    auto it = annotations.find(s.sample_id());
    if (it == annotations.end() || it->second.labels.empty()) {
      throw DataError("no expert annotations for sample " + s.sample_id());
    }
    matches += it->second.unique_labels().size() == s.width();
  }
  return static_cast<double>(matches) / static_cast<double>(sets.size());
}

std::string check_noise_series(const NoiseSeries& series) {
  if (series.levels.empty()) return "noise series is empty";
  const auto& first = series.levels.front().dataset;
  std::set<std::string> ids;
  for (const auto& r : first.records) ids.insert(r.sample_id);
  for (std::size_t i = 0; i < series.levels.size(); ++i) {
    const auto& level = series.levels[i];
    if (!(level.sigma >= 0.0) || !std::isfinite(level.sigma)) {
      return "sigma at level " + std::to_string(i) + " is negative or not finite";
    }
    if (i > 0 && !(level.sigma > series.levels[i - 1].sigma)) {
      return "sigmas are not strictly increasing at level " + std::to_string(i);
    }
    if (!(level.dataset.label_space == first.label_space)) {
      return "label space differs at level " + std::to_string(i);
    }
    std::set<std::string> level_ids;
    for (const auto& r : level.dataset.records) level_ids.insert(r.sample_id);
    if (level_ids != ids) return "sample ids differ at level " + std::to_string(i);
  }
  return {};
}

WidthStats width_stats(const std::vector<PredictionSet>& sets, std::size_t k) {
  WidthStats s;
  s.histogram.assign(k + 1, 0);
  s.n = sets.size();
  std::size_t total = 0;
  for (const auto& p : sets) {
    if (p.width() > k) throw InvariantError("set wider than the label space");
    ++s.histogram[p.width()];
    total += p.width();
  }
  if (s.n > 0) {
    s.mean_width = static_cast<double>(total) / static_cast<double>(s.n);
    s.full_set_fraction = static_cast<double>(s.histogram[k]) / static_cast<double>(s.n);
  }
  return s;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

WidthProfile ood_width_profile(const CalibratedPredictor& p, const NoiseSeries& series) {
  if (auto problem = check_noise_series(series); !problem.empty()) throw DataError(problem);
  const std::size_t k = p.label_space().size();
  WidthProfile profile;
  std::vector<double> sigmas, widths;
  for (const auto& level : series.levels) {
    LevelWidth lw{level.sigma, width_stats(predict_sets(p, level.dataset), k)};
    sigmas.push_back(lw.sigma);
    widths.push_back(lw.stats.mean_width);
    profile.per_level.push_back(std::move(lw));
  }
  const auto rho = spearman(sigmas, widths);
  profile.degenerate = !rho.has_value();
  profile.trend_correlation = rho.value_or(0.0);
  return profile;
}

OodComparison ood_dataset_compare(const CalibratedPredictor& p, const Dataset& ind,
                                  const Dataset& ood) {
  const std::size_t k = p.label_space().size();
  if (!(ind.label_space == p.label_space()) || !(ood.label_space == p.label_space())) {
    throw DataError("label space of the compared datasets does not match the predictor");
  }
  OodComparison c;
  c.ind = width_stats(predict_sets(p, ind), k);
  c.ood = width_stats(predict_sets(p, ood), k);
  c.mean_width_difference = c.ood.mean_width - c.ind.mean_width;
  return c;
}

}  // namespace cpkit
