#pragma once

#include <stdexcept>
#include <string>

namespace gflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// expr
struct UnboundVariable : Error {
    explicit UnboundVariable(const std::string& name)
        : Error("unbound variable '" + name + "'"), name(name) {}
    std::string name;
};

struct DomainError : Error {
    using Error::Error;
};

struct SyntaxError : Error {
    SyntaxError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

// graded algebra
struct SignatureMismatch : Error {
    using Error::Error;
};

struct DegreeError : Error {
    using Error::Error;
};

struct IndexNotDominated : Error {
    using Error::Error;
};

// flows
struct NotHomological : Error {
    using Error::Error;
};

struct NonzeroValueForGradedTime : Error {
    using Error::Error;
};

struct OutOfIntegratedRange : Error {
    using Error::Error;
};

struct EvaluationError : Error {
    using Error::Error;
};

struct IllConditioned : Error {
    using Error::Error;
};

struct MismatchBeyondTolerance : Error {
    using Error::Error;
};

// problem files
struct ParseError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

// numeric map composition beyond the supported derivative order
struct UnsupportedConfiguration : Error {
    using Error::Error;
};

} // namespace gflow
