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

#include "cpkit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cpkit/random.hpp"

namespace cpkit {

std::string check_spec(const GeneratorSpec& spec) {
  if (spec.k < 2) return "K must be >= 2";
  if (spec.n < 1) return "n must be >= 1";
  if (spec.annotators < 1) return "annotators must be >= 1";
  if (!std::isfinite(spec.confidence) || !(spec.confidence >= 0.0)) {
    return "confidence must be finite and >= 0";
  }
  if (!std::isfinite(spec.noise_sigma) || !(spec.noise_sigma >= 0.0)) {
    return "noise_sigma must be finite and >= 0";
  }
  if (!spec.class_prior.empty()) {
    if (spec.class_prior.size() != spec.k) return "class_prior must have K entries";
    double sum = 0.0;
    for (double p : spec.class_prior) {
      if (!std::isfinite(p) || p < 0.0) return "class_prior entries must be finite and >= 0";
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) return "class_prior must sum to 1";
  }
  if (!spec.class_names.empty() && spec.class_names.size() != spec.k) {
    return "class_names must have K entries";
  }
  return {};
}

LabelSpace spec_label_space(const GeneratorSpec& spec) {
  if (!spec.class_names.empty()) return LabelSpace(spec.class_names);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < spec.k; ++i) names.push_back("c" + std::to_string(i));
  return LabelSpace(std::move(names));
}

namespace {

struct LatentSample {
  ClassIndex label;
  std::vector<double> base_noise;
  std::vector<double> perturbation;
  std::vector<double> annotator_uniforms;
};

// Draw order per sample is fixed: label, K base normals, K perturbation
// normals, one uniform per annotator.
std::vector<LatentSample> draw_latents(const GeneratorSpec& spec) {
  std::vector<double> prior = spec.class_prior;
  if (prior.empty()) prior.assign(spec.k, 1.0 / static_cast<double>(spec.k));
  Rng rng(spec.seed);
  std::vector<LatentSample> out(spec.n);
  for (auto& s : out) {
    s.label = rng.categorical(prior);
    s.base_noise.resize(spec.k);
    for (double& e : s.base_noise) e = rng.normal();
    s.perturbation.resize(spec.k);
    for (double& e : s.perturbation) e = rng.normal();
    s.annotator_uniforms.resize(spec.annotators);
    for (double& u : s.annotator_uniforms) u = rng.uniform();
  }
  return out;
}

std::vector<double> softmax(const std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

ClassIndex inverse_cdf(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (ClassIndex c = 0; c < probs.size(); ++c) {
    acc += probs[c];
    if (u < acc) return c;
  }
  ClassIndex last = probs.size() - 1;
  while (last > 0 && probs[last] <= 0.0) --last;
  return last;
}

std::string sample_name(std::size_t i) { return "s" + std::to_string(i); }

Dataset realize(const GeneratorSpec& spec, const std::vector<LatentSample>& latents,
                double sigma, std::string name) {
  Dataset d{std::move(name), spec_label_space(spec), {}, {}};
  d.records.reserve(latents.size());
  const double scale = 1.0 / std::sqrt(1.0 + sigma * sigma);
  std::vector<double> z(spec.k);
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const auto& s = latents[i];
    for (std::size_t j = 0; j < spec.k; ++j) {
      const double signal = j == s.label ? spec.confidence : 0.0;
      z[j] = (signal + s.base_noise[j] + sigma * s.perturbation[j]) * scale;
    }
    SoftmaxRecord r{sample_name(i), softmax(z), s.label};
    AnnotationSet a{r.sample_id, {}, std::nullopt};
    for (std::size_t e = 0; e < spec.annotators; ++e) {
      a.labels.push_back({"e" + std::to_string(e), inverse_cdf(r.probs, s.annotator_uniforms[e])});
    }
    d.annotations.emplace(r.sample_id, std::move(a));
    d.records.push_back(std::move(r));
  }
  return d;
}

void require_valid(const GeneratorSpec& spec) {
  if (auto problem = check_spec(spec); !problem.empty()) {
    throw std::invalid_argument("invalid generator spec: " + problem);
  }
}

}  // namespace

Dataset generate(const GeneratorSpec& spec) {
  require_valid(spec);
  return realize(spec, draw_latents(spec), spec.noise_sigma, spec.name);
}

NoiseSeries make_noise_series(const GeneratorSpec& spec, const std::vector<double>& sigmas) {
  require_valid(spec);
  if (sigmas.empty() || sigmas.front() != 0.0) {
    throw std::invalid_argument("noise sigmas must start at 0");
  }
  for (std::size_t i = 1; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > sigmas[i - 1]) || !std::isfinite(sigmas[i])) {
      throw std::invalid_argument("noise sigmas must be finite and strictly increasing");
    }
  }
  const auto latents = draw_latents(spec);
  NoiseSeries series;
  for (double sigma : sigmas) {
    // Level 0 keeps the spec's name so it matches generate() exactly.
    std::string name = sigma == 0.0 ? spec.name : spec.name + "_sigma" + std::to_string(sigma);
    series.levels.push_back({sigma, realize(spec, latents, sigma, std::move(name))});
  }
  return series;
}

Dataset uniformize(const Dataset& d, std::string name) {
  Dataset out = d;
  out.name = std::move(name);
  const double u = 1.0 / static_cast<double>(d.label_space.size());
  for (auto& r : out.records) std::fill(r.probs.begin(), r.probs.end(), u);
  return out;
}

SyntheticSplit generate_split(const GeneratorSpec& spec, std::size_t n_cal, std::size_t n_test) {
  GeneratorSpec cal = spec;
  cal.n = n_cal;
  cal.seed = derive_seed(spec.seed, 1);
  cal.name = spec.name + "_calibration";
  GeneratorSpec test = spec;
  test.n = n_test;
  test.seed = derive_seed(spec.seed, 2);
  test.name = spec.name + "_test";
  return {generate(cal), generate(test)};
}

}  // namespace cpkit
