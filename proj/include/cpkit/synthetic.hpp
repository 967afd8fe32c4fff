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

#ifndef CPKIT_SYNTHETIC_HPP_
#define CPKIT_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "cpkit/core.hpp"
#include "cpkit/uncertainty.hpp"

namespace cpkit {

// Synthetic classifier outputs with a known generating process.
//
// For each sample: y ~ class_prior, base logits c*e_y + eps0, perturbation
// eps1 (both iid standard normal per coordinate), and
//
//   z = (c*e_y + eps0 + sigma*eps1) / sqrt(1 + sigma^2),   probs = softmax(z).
//
// The perturbation is variance preserving: it is Gaussian logit noise of
// standard deviation sigma whose only net effect is to shrink the class
// signal to c / sqrt(1 + sigma^2), so larger sigma always flattens the
// softmax toward uniform. Every simulated annotator draws a label from
// `probs`, so annotator disagreement follows the same ambiguity the model
// output expresses. All latent draws are made regardless of sigma, so two
// specs differing only in noise_sigma share their samples.
struct GeneratorSpec {
  std::size_t k = 4;
  std::size_t n = 1000;
  std::vector<double> class_prior;  // empty = uniform
  double confidence = 2.0;
  double noise_sigma = 0.0;
  std::size_t annotators = 4;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;  // empty = c0..c{K-1}
  std::string name = "synthetic";

  bool operator==(const GeneratorSpec&) const = default;
};

// Empty string when valid, otherwise the first problem found.
std::string check_spec(const GeneratorSpec& spec);

LabelSpace spec_label_space(const GeneratorSpec& spec);

// Throws std::invalid_argument for an invalid spec.
Dataset generate(const GeneratorSpec& spec);

// One level per sigma, all sharing the base draws of `spec` (its own
// noise_sigma is ignored). Sigmas must start at 0 and increase strictly.
NoiseSeries make_noise_series(const GeneratorSpec& spec, const std::vector<double>& sigmas);

// Copy of `d` with every probability row replaced by the uniform vector.
Dataset uniformize(const Dataset& d, std::string name = "uniform_ood");

// Calibration/test pair from the same spec with independent seeds.
struct SyntheticSplit {
  Dataset calibration;
  Dataset test;
};
SyntheticSplit generate_split(const GeneratorSpec& spec, std::size_t n_cal, std::size_t n_test);

inline const std::vector<double> kDefaultNoiseSigmas = {0.0, 0.5, 1.0, 2.0, 4.0};

}  // namespace cpkit

#endif  // CPKIT_SYNTHETIC_HPP_
