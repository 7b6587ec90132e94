#pragma once

#include <stdexcept>
#include <string>

namespace rpspt {

// Input errors map to CLI exit code 2, numerical ones to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual bool numerical() const { return false; }
};

class GridAlignmentError : public Error { public: using Error::Error; };
class ParameterError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class ReferenceMismatchError : public Error { public: using Error::Error; };
class MeasureError : public Error { public: using Error::Error; };
class PortfolioError : public Error { public: using Error::Error; };
class PreconditionError : public Error { public: using Error::Error; };
class DiagnosticUnavailableError : public Error { public: using Error::Error; };

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class NumericalError : public Error {
public:
    using Error::Error;
    bool numerical() const override { return true; }
};

class BoundaryError : public NumericalError { public: using NumericalError::NumericalError; };
class InstabilityError : public NumericalError { public: using NumericalError::NumericalError; };
class IllPosedError : public NumericalError { public: using NumericalError::NumericalError; };
class ConditioningError : public NumericalError { public: using NumericalError::NumericalError; };

}  // namespace rpspt
