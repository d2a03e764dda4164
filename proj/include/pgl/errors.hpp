#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pgl {

/// Base of every error thrown by the library. The CLI maps these to exit code 4
/// except BudgetExceeded (3).
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The closure of a relation contains x < x. `cycle` lists element indices of
/// a directed cycle in the generating relation, first element repeated last.
class CycleError : public Error {
  public:
    CycleError(const std::string& what, std::vector<std::size_t> cycle)
        : Error(what), cycle(std::move(cycle)) {}
    std::vector<std::size_t> cycle;
};

class SizeError : public Error {
    using Error::Error;
};
class ShapeMismatch : public Error {
    using Error::Error;
};
class ShapeError : public Error {
    using Error::Error;
};
class DivisibilityError : public Error {
    using Error::Error;
};
class RangeError : public Error {
    using Error::Error;
};
class NotAChain : public Error {
    using Error::Error;
};
class PrecondError : public Error {
    using Error::Error;
};
class InputError : public Error {
    using Error::Error;
};

/// A long-chain partition could not be certified within budget.
class ContractUnmet : public Error {
    using Error::Error;
};

/// A search hit its node cap. Distinct from "no witness exists".
class BudgetExceeded : public Error {
    using Error::Error;
};

class ThresholdNotMet : public Error {
    using Error::Error;
};

/// Raised when a constructive step that is guaranteed to succeed fails; this
/// is always a bug.
class ExtractionFailed : public Error {
    using Error::Error;
};

}  // namespace pgl
