#include "mb/error.hpp"

namespace mb {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidMeasure: return "InvalidMeasure";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorKind::EmptyMeasure: return "EmptyMeasure";
    case ErrorKind::ZeroMass: return "ZeroMass";
    case ErrorKind::DivergentMass: return "DivergentMass";
    case ErrorKind::NotADensity: return "NotADensity";
    case ErrorKind::ZeroProbabilityEvent: return "ZeroProbabilityEvent";
    case ErrorKind::DataImpossibleUnderModel: return "DataImpossibleUnderModel";
    case ErrorKind::ImproperPosterior: return "ImproperPosterior";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::SingularTransform: return "SingularTransform";
    case ErrorKind::InvalidScale: return "InvalidScale";
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::UnknownDistribution: return "UnknownDistribution";
    case ErrorKind::UndefinedReference: return "UndefinedReference";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::InvalidReference: return "InvalidReference";
    case ErrorKind::NoNodes: return "NoNodes";
    case ErrorKind::UnboundData: return "UnboundData";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

ParseError::ParseError(ErrorKind kind, int line, int column, const std::string& message,
                       std::vector<std::string> cycle)
    : Error(kind, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                      message),
      line_(line), column_(column), cycle_(std::move(cycle)) {}

} // namespace mb
