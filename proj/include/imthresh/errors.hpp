// Copyright 2026 The imthresh Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IMTHRESH_ERRORS_HPP_
#define IMTHRESH_ERRORS_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace imthresh {

// Process exit codes used by the command line tool.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kFormat = 3,
  kDomain = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

// Malformed input data: bad file contents, dimension mismatches, missing
// per-candidate values.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(what), message_(what) {}
  FormatError(const std::string& what, std::uint64_t byte_offset)
      : Error(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        message_(what),
        byte_offset_(byte_offset) {}

  std::optional<std::uint64_t> byte_offset() const noexcept {
    return byte_offset_;
  }
  ExitCode exit_code() const noexcept override { return ExitCode::kFormat; }

  // Same error with `prefix` prepended to the message.
  FormatError with_context(const std::string& prefix) const {
    return byte_offset_ ? FormatError(prefix + message_, *byte_offset_)
                        : FormatError(prefix + message_);
  }

 private:
  std::string message_;
  std::optional<std::uint64_t> byte_offset_;
};

// Inputs that are well formed but violate an operation's preconditions.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
  ExitCode exit_code() const noexcept override { return ExitCode::kDomain; }
};

// Correlation or similar statistic undefined for the given input (e.g. a
// constant sample).
class UndefinedStatisticError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Manifest / configuration problems (missing files, bad JSON schema).
class ManifestError : public Error {
 public:
  explicit ManifestError(const std::string& what) : Error(what) {}
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
};

}  // namespace imthresh

#endif  // IMTHRESH_ERRORS_HPP_
