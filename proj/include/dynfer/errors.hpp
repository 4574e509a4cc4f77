#pragma once

#include <stdexcept>
#include <string>

namespace dynfer {

// Thrown when an operation needs a valid scenario and validation failed.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A document parsed as JSON but does not describe what it claims to.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Every parameter the prior supports assigns zero likelihood to the dataset.
class ImpossibleDataset : public std::runtime_error {
  public:
    explicit ImpossibleDataset(const std::string& what) : std::runtime_error(what) {}
};

// A belief update was requested for an (x, y) pair with zero predictive mass.
class ImpossibleObservation : public std::runtime_error {
  public:
    explicit ImpossibleObservation(const std::string& what) : std::runtime_error(what) {}
};

// A folded belief matched no stored node; the policy and scenario disagree.
class NodeNotFound : public std::runtime_error {
  public:
    explicit NodeNotFound(const std::string& what) : std::runtime_error(what) {}
};

// An enumeration would exceed its configured budget. `estimate` is the
// projected count; `round` is the offending round for node caps, -1 otherwise.
class CapExceeded : public std::runtime_error {
  public:
    CapExceeded(const std::string& what, double estimate_, int round_ = -1)
        : std::runtime_error(what), estimate(estimate_), round(round_) {}

    double estimate;
    int round;
};

}  // namespace dynfer
