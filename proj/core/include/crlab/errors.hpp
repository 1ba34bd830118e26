#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// point outside the bounding lattice
struct OutOfDomain : Error {
    using Error::Error;
};

// a stated hypothesis of an estimate or step does not hold
struct HypothesisViolation : Error {
    std::string hypothesis;
    HypothesisViolation(std::string name, const std::string& detail)
        : Error(name + ": " + detail), hypothesis(std::move(name)) {}
};

struct ResolutionError : Error {
    using Error::Error;
};

struct SupportViolation : Error {
    using Error::Error;
};

struct CoverageError : Error {
    using Error::Error;
};

struct DegenerateError : Error {
    using Error::Error;
};

struct SolverError : Error {
    std::vector<double> history;
    SolverError(const std::string& what, std::vector<double> h)
        : Error(what), history(std::move(h)) {}
};

struct InadmissibleError : Error {
    std::vector<std::string> violations;
    InadmissibleError(const std::string& what, std::vector<std::string> v)
        : Error(what), violations(std::move(v)) {}
};

struct InfeasibleError : Error {
    using Error::Error;
};

}  // namespace crlab
