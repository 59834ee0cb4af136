#pragma once

#include <stdexcept>
#include <string>

namespace efpe {

/// Instance data that violates the schema or the model invariants.
class MalformedInstance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An enumeration (allocations, subsets, splits, vertices) would exceed its budget.
class EnumerationLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedLp : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The truncated simplex is empty (epsilon > 1/n).
class EmptyDomain : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace efpe
