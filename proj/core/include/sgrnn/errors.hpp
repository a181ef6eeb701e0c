/*
 * Copyright 2026 The SGRNN Authors.
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

#ifndef SGRNN_ERRORS_HPP_
#define SGRNN_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgrnn {

// Operand shapes do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A precondition of an operation was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class BatchTooSmallError : public ContractError {
 public:
  using ContractError::ContractError;
};

// An input that must be finite holds inf or NaN.
class NonFiniteError : public ContractError {
 public:
  using ContractError::ContractError;
};

// Snapshot file could not be parsed. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A parsed or constructed sequence breaks a structural invariant.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::size_t snapshot, const std::string& what)
      : std::runtime_error("snapshot " + std::to_string(snapshot) + ": " + what),
        snapshot_(snapshot) {}
  std::size_t snapshot() const noexcept { return snapshot_; }

 private:
  std::size_t snapshot_;
};

class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The function handed to a gradient check is not deterministic.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(std::size_t epoch)
      : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sgrnn

#endif  // SGRNN_ERRORS_HPP_
