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

#ifndef CPKIT_ERRORS_HPP_
#define CPKIT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cpkit {

// Malformed or contract-violating input data (bad CSV rows, unlabeled
// calibration records, unknown labels, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// An internal invariant did not hold. Seeing one of these is a bug.
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

// Invalid arguments (alpha out of range, bad hyperparameters) are reported
// with std::invalid_argument.

}  // namespace cpkit

#endif  // CPKIT_ERRORS_HPP_
