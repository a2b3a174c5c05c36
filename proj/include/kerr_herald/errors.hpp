// Copyright 2026 The kerr-herald Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kerr_herald {

enum class ErrorKind {
    InvalidDimension,
    InvalidParameter,
    DimensionMismatch,
    UndefinedState,
    DegenerateSteadyState,
    NoConvergence,
    ExceptionalPoint,
    DegenerateTopEigenvalue,
    MissingParityStructure,
    NonNormalizable,
    NotPositive,
    UseSme,
    StepSizeRejection,
    TraceCollapse,
    InsufficientDecay,
    TruncationDomain,
    EmptyAdmissibleSet,
    GridMismatch,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidDimension: return "invalid-dimension";
        case ErrorKind::InvalidParameter: return "invalid-parameter";
        case ErrorKind::DimensionMismatch: return "dimension-mismatch";
        case ErrorKind::UndefinedState: return "undefined-state";
        case ErrorKind::DegenerateSteadyState: return "degenerate-steady-state";
        case ErrorKind::NoConvergence: return "no-convergence";
        case ErrorKind::ExceptionalPoint: return "exceptional-point";
        case ErrorKind::DegenerateTopEigenvalue: return "degenerate-top-eigenvalue";
        case ErrorKind::MissingParityStructure: return "missing-parity-structure";
        case ErrorKind::NonNormalizable: return "non-normalizable";
        case ErrorKind::NotPositive: return "not-psd";
        case ErrorKind::UseSme: return "use-sme";
        case ErrorKind::StepSizeRejection: return "step-size-rejection";
        case ErrorKind::TraceCollapse: return "trace-collapse";
        case ErrorKind::InsufficientDecay: return "insufficient-decay";
        case ErrorKind::TruncationDomain: return "truncation-domain";
        case ErrorKind::EmptyAdmissibleSet: return "empty-admissible-set";
        case ErrorKind::GridMismatch: return "grid-mismatch";
    }
    return "unknown";
}

/// Numerical or contract failure raised by the library. The kind is stable and
/// is what the CLI reports in its manifest.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Collects non-fatal diagnostics (e.g. Fock truncation warnings).
using Warnings = std::vector<std::string>;

} // namespace kerr_herald
