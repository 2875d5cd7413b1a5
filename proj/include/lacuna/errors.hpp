#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lacuna {

enum class ErrorKind {
    InvalidArgument,
    EmptySet,
    DegreeOrder,
    BadMeasure,
    NoConvergence,
    BadSequence,
    DegenerateThreshold,
    ZeroPolynomial,
    BudgetExceeded,
    NoFeasible,
    HypothesisFail,
    GeometryFail,
    KappaFail,
    NoMEps,
    PrecisionLoss,
    EvenDegree,
    ConstantMismatch,
    Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace lacuna
