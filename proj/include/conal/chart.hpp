#pragma once

#include <Eigen/Dense>

#include "conal/lorentz.hpp"

namespace conal {

/// Point on the one-sheeted hyperboloid H_n = {-y0^2 + y1^2 + ... + yn^2 = 1}
/// in R^{n+1}. Coordinates are (y0, ..., yn); y0 is timelike.
class HyperboloidPoint {
public:
    explicit HyperboloidPoint(Vec coords);

    /// Constraint residual tolerance, relative to max(1, |y|^2). Points deep
    /// in the chart map to huge hyperboloid coordinates, so an absolute bound
    /// is not meaningful there.
    static constexpr double kFormTolerance = 1e-9;

    /// Spatial dimension n (the coordinate vector has length n+1).
    int space_dim() const { return static_cast<int>(coords_.size()) - 1; }
    const Vec& coords() const { return coords_; }
    double operator[](int i) const { return coords_[i]; }

    /// Quadric residual -y0^2 + y1^2 + ... + yn^2 - 1.
    double constraint_residual() const;

    /// Rescaled copy satisfying the constraint exactly. Never applied
    /// implicitly by constructors.
    HyperboloidPoint renormalized() const;

private:
    Vec coords_;
};

/// Closed ball in V_- = R^{n-1} with strictly positive radius.
struct Ball {
    Ball(Vec center_, double radius_);
    Vec center;
    double radius;
};

/// Chart component membership: x0 > 0.
bool in_chart_component(const ChartVector& x);

/// Chart -> hyperboloid isomorphism:
///   y0 = (1 - Delta(x)) / (2 x0),  y_j = x_j / x0,  yn = (1 + Delta(x)) / (2 x0).
/// Throws NotInChartDomain unless x0 > 0.
HyperboloidPoint chart_to_hyperboloid(const ChartVector& x);

/// Inverse map: x0 = 1 / (y0 + yn), x_j = y_j / (y0 + yn).
/// Throws ChartSingularity when |y0 + yn| <= 1e-12.
ChartVector hyperboloid_to_chart(const HyperboloidPoint& y);

/// Hyperboloid partial order: y >= x iff y0 >= x0 and
/// -x0 y0 + x1 y1 + ... + xn yn >= 1.
bool order_geq_hyperboloid(const HyperboloidPoint& y, const HyperboloidPoint& x);

/// Chart order: x lies in the future set M_z^+, i.e.
/// Delta(z - x) >= 0, z0 - x0 >= 0 and x0 > 0. Requires z in the chart.
bool future_contains(const ChartVector& z, const ChartVector& x);

/// The straight segment from one chart point to another is causal iff the
/// displacement lies in -closure(Omega). Requires both endpoints in the chart.
bool is_causal_segment(const ChartVector& from, const ChartVector& to);

/// Future boundary of M_z^+: the ball around (z1, ..., z_{n-1}) of radius z0.
Ball future_boundary_ball(const ChartVector& z);

/// The chart point whose future boundary is the given ball.
ChartVector ball_to_future_apex(const Ball& b);

} // namespace conal
