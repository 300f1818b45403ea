#pragma once

#include <stdexcept>
#include <string>

namespace conal {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inputs of different dimension were mixed in one operation.
struct DimensionMismatch : Error {
    using Error::Error;
};

/// An argument violates a documented precondition or type invariant.
struct InvalidArgument : Error {
    using Error::Error;
};

/// Jordan inversion requested at (or too close to) the null cone.
struct SingularInversion : Error {
    using Error::Error;
};

/// A point required to lie in the chart component {x0 > 0} does not.
struct NotInChartDomain : Error {
    using Error::Error;
};

/// Hyperboloid-to-chart conversion at y0 + yn = 0.
struct ChartSingularity : Error {
    using Error::Error;
};

/// A vector expected on the null cone is not null.
struct NotNull : Error {
    using Error::Error;
};

/// The image of a ball is unbounded (the pole lies in the ball).
struct ImageNotBall : Error {
    using Error::Error;
};

/// Point configuration does not span the lift space.
struct DegenerateConfiguration : Error {
    using Error::Error;
};

/// An iterative procedure failed to reach the requested tolerance.
struct ToleranceNotMet : Error {
    using Error::Error;
};

/// A map assumed order-preserving was caught violating the order.
struct NotConal : Error {
    using Error::Error;
};

/// No candidate conjugator brings the map base point into the chart.
struct NoAdmissibleConjugator : Error {
    using Error::Error;
};

} // namespace conal
