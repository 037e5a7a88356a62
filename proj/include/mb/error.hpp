#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mb {

enum class ErrorKind {
    InvalidMeasure,
    InvalidGrid,
    GridTooCoarse,
    NonFiniteIntegrand,
    EmptyMeasure,
    ZeroMass,
    DivergentMass,
    NotADensity,
    ZeroProbabilityEvent,
    DataImpossibleUnderModel,
    ImproperPosterior,
    DomainError,
    SingularTransform,
    InvalidScale,
    Syntax,
    UnknownDistribution,
    UndefinedReference,
    DuplicateName,
    CycleDetected,
    InvalidReference,
    NoNodes,
    UnboundData,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Error raised while reading model source. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(ErrorKind kind, int line, int column, const std::string& message,
               std::vector<std::string> cycle = {});

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::vector<std::string>& cycle() const noexcept { return cycle_; }

private:
    int line_;
    int column_;
    std::vector<std::string> cycle_;
};

} // namespace mb
