#pragma once

#include <stdexcept>
#include <string>

namespace ipadmm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, int iterations)
        : Error(what + " (after " + std::to_string(iterations) + " iterations)"), iterations_(iterations) {}
    int iterations() const { return iterations_; }

private:
    int iterations_;
};

class IndefiniteOperator : public Error {
public:
    using Error::Error;
};

/// Raised when a structural assumption on the proximal terms or the majorizer fails.
/// `where()` names the block or the inequality that was violated.
class AssumptionViolation : public Error {
public:
    AssumptionViolation(const std::string& where, const std::string& detail)
        : Error("assumption violated at " + where + ": " + detail), where_(where) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

class ToleranceNotMet : public Error {
public:
    ToleranceNotMet(const std::string& what, double achieved, double target)
        : Error(what + ": achieved " + std::to_string(achieved) + ", required " + std::to_string(target)),
          achieved_(achieved), target_(target) {}
    double achieved() const { return achieved_; }
    double target() const { return target_; }

private:
    double achieved_;
    double target_;
};

class RankDeficiency : public Error {
public:
    RankDeficiency(const std::string& what, int pivot)
        : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
    int pivot() const { return pivot_; }

private:
    int pivot_;
};

class SizeLimit : public Error {
public:
    using Error::Error;
};

class Unsupported : public Error {
public:
    using Error::Error;
};

class Misuse : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

}  // namespace ipadmm
