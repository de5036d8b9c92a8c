#pragma once

#include <stdexcept>
#include <string>

namespace mcnf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A triangular factor pivot dropped below the rank / positivity threshold.
struct RankDeficientError : Error {
    using Error::Error;
};

struct NotPositiveDefiniteError : Error {
    using Error::Error;
};

// A state left the retraction trust region or violated a manifold constraint.
struct OffManifoldError : Error {
    using Error::Error;
};

// Step underflow, step budget exhausted or non-finite derivatives.
struct SolverError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace mcnf
