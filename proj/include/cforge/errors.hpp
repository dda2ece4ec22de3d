#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cforge {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& message)
        : Error("syntax error at byte " + std::to_string(offset) + ": " + message), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class UnknownIdentifier : public Error {
public:
    UnknownIdentifier(std::size_t offset, const std::string& token)
        : Error("unknown identifier '" + token + "' at byte " + std::to_string(offset)), token_(token),
          offset_(offset) {}
    const std::string& token() const { return token_; }
    std::size_t offset() const { return offset_; }

private:
    std::string token_;
    std::size_t offset_;
};

// A model-description problem detected after parsing (line-numbered).
class ModelError : public Error {
public:
    ModelError(std::size_t line, const std::string& message)
        : Error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class NonQuadraticLagrangian : public ModelError {
public:
    using ModelError::ModelError;
};

class IrregularLagrangian : public ModelError {
public:
    using ModelError::ModelError;
};

class NotAffine : public Error {
public:
    using Error::Error;
};

class InconsistentSystem : public Error {
public:
    InconsistentSystem(const std::string& witness)
        : Error("inconsistent system: " + witness + " must vanish"), witness_(witness) {}
    const std::string& witness() const { return witness_; }

private:
    std::string witness_;
};

// Elimination met a pivot that is neither zero nor invertible on the surface.
class NonUnitPivot : public Error {
public:
    NonUnitPivot(const std::string& pivot)
        : Error("pivot " + pivot + " is not a unit modulo the constraints"), pivot_(pivot) {}
    const std::string& pivot() const { return pivot_; }

private:
    std::string pivot_;
};

class SingularLambda : public Error {
public:
    using Error::Error;
};

class AnalysisError : public Error {
public:
    using Error::Error;
};

class ProjectionFailure : public Error {
public:
    ProjectionFailure(double residual)
        : Error("projection onto the constraint surface failed, residual " + std::to_string(residual)),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class BlowUp : public Error {
public:
    BlowUp(double t) : Error("integration blew up at t = " + std::to_string(t)), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

class EvaluationError : public Error {
public:
    EvaluationError(std::size_t index, const std::string& message)
        : Error(message + " at sample " + std::to_string(index)), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

class SizeGuard : public Error {
public:
    using Error::Error;
};

}  // namespace cforge

namespace cforge {

class UndeclaredSymbol : public ModelError {
public:
    UndeclaredSymbol(std::size_t line, const std::string& token)
        : ModelError(line, "undeclared symbol '" + token + "'"), token_(token) {}
    const std::string& token() const { return token_; }

private:
    std::string token_;
};

}  // namespace cforge
