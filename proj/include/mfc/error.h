// Copyright 2026 The mfc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MFC_ERROR_H_
#define MFC_ERROR_H_

#include <stdexcept>
#include <string>

namespace mfc {

enum class ErrorKind {
  kInvalidState,
  kPopulationMismatch,
  kThetaIncompatible,
  kShapeError,
  kNormalizationError,
  kRegimeError,
  kInvalidDiscount,
  kBoundInvalid,
  kScoreUnderflow,
  kInitMismatch,
  kDivergedInnerLoop,
  kConfigError,
  kInvalidInstance,
  kNoClosedForm,
};

const char* error_kind_name(ErrorKind kind);

// Every failure raised by the library carries a kind so that callers (and
// the CLI exit-code mapping) can react without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what),
        kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidState: return "InvalidState";
    case ErrorKind::kPopulationMismatch: return "PopulationMismatch";
    case ErrorKind::kThetaIncompatible: return "ThetaIncompatible";
    case ErrorKind::kShapeError: return "ShapeError";
    case ErrorKind::kNormalizationError: return "NormalizationError";
    case ErrorKind::kRegimeError: return "RegimeError";
    case ErrorKind::kInvalidDiscount: return "InvalidDiscount";
    case ErrorKind::kBoundInvalid: return "BoundInvalid";
    case ErrorKind::kScoreUnderflow: return "ScoreUnderflow";
    case ErrorKind::kInitMismatch: return "InitMismatch";
    case ErrorKind::kDivergedInnerLoop: return "DivergedInnerLoop";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kInvalidInstance: return "InvalidInstance";
    case ErrorKind::kNoClosedForm: return "NoClosedForm";
  }
  return "Unknown";
}

}  // namespace mfc

#endif  // MFC_ERROR_H_
