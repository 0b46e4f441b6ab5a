#pragma once

#include <stdexcept>
#include <string>

namespace hystereact {

// Input landed outside the active branch domain by more than the
// overshoot tolerance. Usually means the time step is too large and a
// switch was missed.
struct DomainViolation : std::runtime_error {
    explicit DomainViolation(const std::string& what) : std::runtime_error(what) {}
    int node = -1;
};

struct EvaluationOutsideDomain : std::runtime_error {
    explicit EvaluationOutsideDomain(const std::string& what) : std::runtime_error(what) {}
};

struct InconsistentInitialData : std::runtime_error {
    explicit InconsistentInitialData(const std::string& what) : std::runtime_error(what) {}
};

struct LinearSolveFailure : std::runtime_error {
    explicit LinearSolveFailure(const std::string& what) : std::runtime_error(what) {}
};

struct NewtonDivergence : std::runtime_error {
    explicit NewtonDivergence(const std::string& what) : std::runtime_error(what) {}
};

struct FoldCountMismatch : std::runtime_error {
    explicit FoldCountMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ContinuationStall : std::runtime_error {
    explicit ContinuationStall(const std::string& what) : std::runtime_error(what) {}
};

struct GridMismatch : std::runtime_error {
    explicit GridMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct WindowEmpty : std::runtime_error {
    explicit WindowEmpty(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hystereact
