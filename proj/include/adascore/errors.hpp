#pragma once

#include <stdexcept>
#include <string>

namespace adascore {

struct CycleDetected : std::runtime_error {
    explicit CycleDetected(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidConditioningSet : std::invalid_argument {
    explicit InvalidConditioningSet(const std::string& what) : std::invalid_argument(what) {}
};

struct NotAncestralGraph : std::invalid_argument {
    explicit NotAncestralGraph(const std::string& what) : std::invalid_argument(what) {}
};

struct InconsistentSepset : std::runtime_error {
    explicit InconsistentSepset(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateColumn : std::invalid_argument {
    explicit DegenerateColumn(const std::string& what) : std::invalid_argument(what) {}
};

struct NoValidHiding : std::runtime_error {
    explicit NoValidHiding(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateData : std::invalid_argument {
    explicit DegenerateData(const std::string& what) : std::invalid_argument(what) {}
};

struct SingularSystem : std::runtime_error {
    explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientSamples : std::invalid_argument {
    explicit InsufficientSamples(const std::string& what) : std::invalid_argument(what) {}
};

struct TooFewSamples : std::invalid_argument {
    explicit TooFewSamples(const std::string& what) : std::invalid_argument(what) {}
};

struct NodeCountMismatch : std::invalid_argument {
    explicit NodeCountMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, long row, long col)
        : std::runtime_error(what), row(row), col(col) {}
    long row;
    long col;
};

}  // namespace adascore
