#pragma once

#include <stdexcept>
#include <string>

namespace smf {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

class NotSymmetric : public Error {
public:
    explicit NotSymmetric(const std::string& msg) : Error(msg) {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};

class IndexOutOfRange : public Error {
public:
    explicit IndexOutOfRange(const std::string& msg) : Error(msg) {}
};

class InvalidParameter : public Error {
public:
    explicit InvalidParameter(const std::string& msg) : Error(msg) {}
};

class EvaluationFailure : public Error {
public:
    explicit EvaluationFailure(const std::string& msg) : Error(msg) {}
};

class InvalidSampleCount : public Error {
public:
    explicit InvalidSampleCount(const std::string& msg) : Error(msg) {}
};

class SingularFactor : public Error {
public:
    explicit SingularFactor(const std::string& msg) : Error(msg) {}
};

class InfeasibleStart : public Error {
public:
    explicit InfeasibleStart(const std::string& msg) : Error(msg) {}
};

class NoFeasiblePoint : public Error {
public:
    explicit NoFeasiblePoint(const std::string& msg) : Error(msg) {}
};

class InfeasibleUpdate : public Error {
public:
    explicit InfeasibleUpdate(const std::string& msg) : Error(msg) {}
};

class EmptyIntersection : public Error {
public:
    explicit EmptyIntersection(const std::string& msg) : Error(msg) {}
};

class DegenerateInput : public Error {
public:
    explicit DegenerateInput(const std::string& msg) : Error(msg) {}
};

class RejectionBudgetExceeded : public Error {
public:
    explicit RejectionBudgetExceeded(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace smf
