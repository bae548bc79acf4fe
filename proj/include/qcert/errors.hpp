#pragma once

#include <stdexcept>
#include <string>

namespace qcert {

// Thrown when a requested dense tensor-product dimension exceeds the hard cap.
class DimensionCapError : public std::runtime_error {
public:
    explicit DimensionCapError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a numerical invariant that the library promises does not hold
// (reconstruction residuals, probability drift, internal route disagreements).
class NumericalViolation : public std::runtime_error {
public:
    explicit NumericalViolation(const std::string& what) : std::runtime_error(what) {}
};

// Largest dense dimension we are willing to materialize for a tensor-product
// operator or measure projectively.
inline constexpr long kDenseDimensionCap = 1L << 16;

} // namespace qcert
