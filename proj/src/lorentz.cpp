#include "conal/lorentz.hpp"

#include <cmath>

namespace conal {

ChartVector::ChartVector(Vec coords) : coords_(std::move(coords)) {
    if (coords_.size() < 2)
        throw InvalidArgument("ChartVector needs dimension n >= 2");
    if (!coords_.allFinite())
        throw InvalidArgument("ChartVector entries must be finite");
}

ChartVector ChartVector::neutral(int dim) {
    Vec e = Vec::Zero(dim);
    e[0] = 1.0;
    return ChartVector(e);
}

bool approx_equal(const ChartVector& a, const ChartVector& b, double tol) {
    if (a.dim() != b.dim()) return false;
    return (a.coords() - b.coords()).cwiseAbs().maxCoeff() <= tol;
}

void detail::require_same_dim(const ChartVector& a, const ChartVector& b, const char* op) {
    if (a.dim() != b.dim())
        throw DimensionMismatch(std::string(op) + ": operands have dimensions " +
                                std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
}

ChartVector jordan_mul(const ChartVector& x, const ChartVector& y) {
    detail::require_same_dim(x, y, "jordan_mul");
    const int n = x.dim();
    Vec z(n);
    z[0] = x.coords().dot(y.coords());
    for (int j = 1; j < n; ++j) z[j] = x[0] * y[j] + x[j] * y[0];
    return ChartVector(z);
}

double lorentz_form(const ChartVector& x) {
    const Vec& c = x.coords();
    return c[0] * c[0] - c.tail(c.size() - 1).squaredNorm();
}

ChartVector jordan_inv(const ChartVector& x) {
    const double delta = lorentz_form(x);
    const double scale = std::max(1.0, x.coords().squaredNorm());
    if (std::abs(delta) <= 1e-12 * scale)
        throw SingularInversion("jordan_inv: Lorentz form vanishes (Delta = " +
                                std::to_string(delta) + ")");
    Vec inv = alpha(x).coords() / delta;
    return ChartVector(inv);
}

bool in_cone(const ChartVector& x, ConeMode mode, double margin) {
    const double delta = lorentz_form(x);
    if (mode == ConeMode::Open) return delta > 0.0 && x[0] > 0.0;
    return delta >= -margin && x[0] >= -margin;
}

ChartVector alpha(const ChartVector& x) {
    Vec a = -x.coords();
    a[0] = x[0];
    return ChartVector(a);
}

std::pair<ChartVector, ChartVector> split_parts(const ChartVector& x) {
    Vec plus = Vec::Zero(x.dim());
    plus[0] = x[0];
    Vec minus = x.coords();
    minus[0] = 0.0;
    return {ChartVector(plus), ChartVector(minus)};
}

} // namespace conal
