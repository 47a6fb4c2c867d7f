#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace shrinkinfo {

// Vectors of different lengths were combined. Never broadcast.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An input lies outside the domain of a formula (e.g. James-Stein at y = 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A computation could not produce a trustworthy number: singular covariance,
// too few null draws for the requested significance level, and so on.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A generalized-estimator curve never changes sign on its grid.
class NoCrossingError : public NumericalError {
public:
    NoCrossingError(double first_value, double last_value)
        : NumericalError("generalized estimator curve has no zero crossing on its grid (end values " +
                         std::to_string(first_value) + ", " + std::to_string(last_value) + ")"),
          first_value_(first_value),
          last_value_(last_value) {}

    double first_value() const noexcept { return first_value_; }
    double last_value() const noexcept { return last_value_; }

private:
    double first_value_;
    double last_value_;
};

// A failure raised while processing one simulated sample; aborts the run.
class SampleError : public NumericalError {
public:
    SampleError(std::uint64_t index, const std::string& what)
        : NumericalError("sample " + std::to_string(index) + ": " + what), index_(index) {}

    std::uint64_t index() const noexcept { return index_; }

private:
    std::uint64_t index_;
};

}  // namespace shrinkinfo
