#include "conal/chart.hpp"

#include <cmath>

namespace conal {

HyperboloidPoint::HyperboloidPoint(Vec coords) : coords_(std::move(coords)) {
    if (coords_.size() < 3)
        throw InvalidArgument("HyperboloidPoint needs at least 3 coordinates");
    if (!coords_.allFinite())
        throw InvalidArgument("HyperboloidPoint entries must be finite");
    const double scale = std::max(1.0, coords_.squaredNorm());
    if (std::abs(constraint_residual()) > kFormTolerance * scale)
        throw InvalidArgument("point violates the hyperboloid constraint (residual " +
                              std::to_string(constraint_residual()) + ")");
}

double HyperboloidPoint::constraint_residual() const {
    const Vec& y = coords_;
    return -y[0] * y[0] + y.tail(y.size() - 1).squaredNorm() - 1.0;
}

HyperboloidPoint HyperboloidPoint::renormalized() const {
    const Vec& y = coords_;
    const double q = -y[0] * y[0] + y.tail(y.size() - 1).squaredNorm();
    if (q <= 0.0)
        throw InvalidArgument("cannot renormalize: quadric value is not positive");
    return HyperboloidPoint(y / std::sqrt(q));
}

Ball::Ball(Vec center_, double radius_) : center(std::move(center_)), radius(radius_) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidArgument("Ball radius must be strictly positive and finite");
    if (!center.allFinite())
        throw InvalidArgument("Ball center must be finite");
}

bool in_chart_component(const ChartVector& x) { return x.x0() > 0.0; }

HyperboloidPoint chart_to_hyperboloid(const ChartVector& x) {
    if (!in_chart_component(x))
        throw NotInChartDomain("chart_to_hyperboloid: x0 must be positive");
    const int n = x.dim();
    const double delta = lorentz_form(x);
    Vec y(n + 1);
    y[0] = (1.0 - delta) / (2.0 * x.x0());
    for (int j = 1; j < n; ++j) y[j] = x[j] / x.x0();
    y[n] = (1.0 + delta) / (2.0 * x.x0());
    return HyperboloidPoint(y);
}

ChartVector hyperboloid_to_chart(const HyperboloidPoint& y) {
    const int n = y.space_dim();
    const double s = y[0] + y[n];
    if (std::abs(s) <= 1e-12)
        throw ChartSingularity("hyperboloid_to_chart: y0 + yn = " + std::to_string(s));
    Vec x(n);
    x[0] = 1.0 / s;
    for (int j = 1; j < n; ++j) x[j] = y[j] / s;
    return ChartVector(x);
}

bool order_geq_hyperboloid(const HyperboloidPoint& y, const HyperboloidPoint& x) {
    if (y.space_dim() != x.space_dim())
        throw DimensionMismatch("order_geq_hyperboloid: mixed dimensions");
    if (y[0] < x[0]) return false;
    const int n = y.space_dim();
    double inner = -x[0] * y[0];
    for (int i = 1; i <= n; ++i) inner += x[i] * y[i];
    return inner >= 1.0;
}

bool future_contains(const ChartVector& z, const ChartVector& x) {
    detail::require_same_dim(z, x, "future_contains");
    if (!in_chart_component(z))
        throw NotInChartDomain("future_contains: base point must lie in the chart");
    if (!(x.x0() > 0.0)) return false;
    const ChartVector diff(Vec(z.coords() - x.coords()));
    return diff[0] >= 0.0 && lorentz_form(diff) >= 0.0;
}

bool is_causal_segment(const ChartVector& from, const ChartVector& to) {
    detail::require_same_dim(from, to, "is_causal_segment");
    if (!in_chart_component(from) || !in_chart_component(to))
        throw NotInChartDomain("is_causal_segment: endpoints must lie in the chart");
    // to - from in -closure(Omega), i.e. from - to in closure(Omega).
    return in_cone(ChartVector(Vec(from.coords() - to.coords())), ConeMode::Closed);
}

Ball future_boundary_ball(const ChartVector& z) {
    if (!in_chart_component(z))
        throw NotInChartDomain("future_boundary_ball: z must lie in the chart");
    return Ball(z.minus_part(), z.x0());
}

ChartVector ball_to_future_apex(const Ball& b) {
    Vec z(b.center.size() + 1);
    z[0] = b.radius;
    z.tail(b.center.size()) = b.center;
    return ChartVector(z);
}

} // namespace conal
