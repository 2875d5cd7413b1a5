#include "lacuna/errors.hpp"

namespace lacuna {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::DegreeOrder: return "DegreeOrder";
    case ErrorKind::BadMeasure: return "BadMeasure";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::BadSequence: return "BadSequence";
    case ErrorKind::DegenerateThreshold: return "DegenerateThreshold";
    case ErrorKind::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NoFeasible: return "NoFeasible";
    case ErrorKind::HypothesisFail: return "HypothesisFail";
    case ErrorKind::GeometryFail: return "GeometryFail";
    case ErrorKind::KappaFail: return "KappaFail";
    case ErrorKind::NoMEps: return "NoMEps";
    case ErrorKind::PrecisionLoss: return "PrecisionLoss";
    case ErrorKind::EvenDegree: return "EvenDegree";
    case ErrorKind::ConstantMismatch: return "ConstantMismatch";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace lacuna
