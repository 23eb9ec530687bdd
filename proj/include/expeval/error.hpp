/*
 * Copyright (c) 2026 The expeval Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace expeval {

enum class ErrorCode {
  InvalidArgument = 1,
  FormatVersion,
  Row,
  Validation,
  RefusedWrite,
  ScoreMismatch,
  CorpusTooSmall,
  Shape,
  Domain,
  ConstantCurve,
  NonPositiveTempo,
  TooFewDimensions,
  Sampling,
  CalibrationInfeasible,
  TooFewPerformances,
  UndefinedReliability,
  NoExcerpt,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <ErrorCode C>
class CodedError : public Error {
 public:
  explicit CodedError(const std::string& what) : Error(C, what) {}
};

using InvalidArgumentError = CodedError<ErrorCode::InvalidArgument>;
using FormatVersionError = CodedError<ErrorCode::FormatVersion>;
using RefusedWrite = CodedError<ErrorCode::RefusedWrite>;
using CorpusTooSmallError = CodedError<ErrorCode::CorpusTooSmall>;
using ShapeError = CodedError<ErrorCode::Shape>;
using DomainError = CodedError<ErrorCode::Domain>;
using ConstantCurveError = CodedError<ErrorCode::ConstantCurve>;
using TooFewDimensionsError = CodedError<ErrorCode::TooFewDimensions>;
using SamplingError = CodedError<ErrorCode::Sampling>;
using CalibrationInfeasible = CodedError<ErrorCode::CalibrationInfeasible>;
using TooFewPerformancesError = CodedError<ErrorCode::TooFewPerformances>;
using UndefinedReliability = CodedError<ErrorCode::UndefinedReliability>;
using NoExcerptError = CodedError<ErrorCode::NoExcerpt>;
using IoError = CodedError<ErrorCode::Io>;

/// A row of a perfalign file that cannot be split or parsed. `line` is 1-based.
class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& what)
      : Error(ErrorCode::Row, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Every range/uniqueness violation found in a record, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(ErrorCode::Validation, join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "validation failed:";
    for (const auto& s : v) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

class ScoreMismatchError : public Error {
 public:
  ScoreMismatchError(std::string note_id, const std::string& detail)
      : Error(ErrorCode::ScoreMismatch, "score mismatch at note '" + note_id + "': " + detail),
        note_id_(std::move(note_id)) {}
  const std::string& note_id() const noexcept { return note_id_; }

 private:
  std::string note_id_;
};

class NonPositiveTempoError : public Error {
 public:
  explicit NonPositiveTempoError(std::size_t segment)
      : Error(ErrorCode::NonPositiveTempo,
              "non-increasing mean performed onsets in IOI segment " + std::to_string(segment)),
        segment_(segment) {}
  std::size_t segment() const noexcept { return segment_; }

 private:
  std::size_t segment_;
};

}  // namespace expeval
