#pragma once

#include <stdexcept>
#include <string>

namespace nlcd {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// |G(x)| > 0 at a sample point where K(x) = 0: no finite dominating constant.
struct DominationFailure : Error {
    using Error::Error;
};

/// Moment quadrature failed to converge on the truncation ladder.
struct NonIntegrable : Error {
    using Error::Error;
};

/// Even kernel with non-positive raw discrete mass.
struct DegenerateKernel : Error {
    using Error::Error;
};

/// Operands live on different grids.
struct GridMismatch : Error {
    using Error::Error;
};

/// A state value became NaN or infinite (time-stepping instability).
struct NonFinite : Error {
    using Error::Error;
};

/// Conserved mass drifted beyond the runtime tolerance.
struct MassDrift : Error {
    using Error::Error;
};

struct ConfigInvalid : Error {
    using Error::Error;
};

struct OutOfRange : Error {
    using Error::Error;
};

/// No normalization constant keeps the profile denominator sign-definite.
struct NoAdmissibleConstant : Error {
    using Error::Error;
};

/// Shooting bracket did not enclose the target mass monotonically.
struct BisectionFailure : Error {
    using Error::Error;
};

/// Self-similar evaluation requested at t <= 0.
struct NonPositiveTime : Error {
    using Error::Error;
};

/// Functional requires a nonnegative input and got min(u) < -1e-12.
struct NegativityViolation : Error {
    using Error::Error;
};

/// Too few points for a requested fit.
struct InsufficientData : Error {
    using Error::Error;
};

/// Run and profile masses disagree beyond tolerance.
struct MassMismatch : Error {
    using Error::Error;
};

struct RangeError : Error {
    using Error::Error;
};

struct PreconditionViolation : Error {
    using Error::Error;
};

}  // namespace nlcd
