#pragma once

#include <utility>

#include <Eigen/Dense>

#include "conal/errors.hpp"

namespace conal {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Element of the spin-factor Jordan algebra V = R^{1,n-1} in chart
/// coordinates (x0, x1, ..., x_{n-1}). The 0th coordinate is the timelike
/// component; (x1, ..., x_{n-1}) span the spacelike part V_-.
class ChartVector {
public:
    explicit ChartVector(Vec coords);

    /// The neutral element e = (1, 0, ..., 0).
    static ChartVector neutral(int dim);

    int dim() const { return static_cast<int>(coords_.size()); }
    const Vec& coords() const { return coords_; }
    double operator[](int i) const { return coords_[i]; }

    double x0() const { return coords_[0]; }
    /// The V_- component (x1, ..., x_{n-1}) as a vector of length n-1.
    Vec minus_part() const { return coords_.tail(coords_.size() - 1); }

private:
    Vec coords_;
};

/// Componentwise comparison with absolute tolerance.
bool approx_equal(const ChartVector& a, const ChartVector& b, double tol = 1e-12);

/// Jordan product: z0 = <x, y> (Euclidean), z_j = x0*y_j + x_j*y0.
ChartVector jordan_mul(const ChartVector& x, const ChartVector& y);

/// Quadratic Lorentz form Delta(x) = x0^2 - x1^2 - ... - x_{n-1}^2.
double lorentz_form(const ChartVector& x);

/// Jordan inverse x^{-1} = alpha(x) / Delta(x). Satisfies x * x^{-1} = e.
/// Throws SingularInversion when |Delta(x)| <= 1e-12 * max(1, |x|^2).
ChartVector jordan_inv(const ChartVector& x);

enum class ConeMode { Open, Closed };

/// Membership in the Lorentz cone Omega = {Delta > 0, x0 > 0} or its closure.
/// The open test is strict with no tolerance. The closed test admits an
/// optional margin: Delta >= -margin and x0 >= -margin.
bool in_cone(const ChartVector& x, ConeMode mode, double margin = 0.0);

/// The involution alpha(x) = (x0, -x1, ..., -x_{n-1}).
ChartVector alpha(const ChartVector& x);

/// Eigenspace split x = x_+ + x_- with x_+ = (x + alpha(x))/2.
std::pair<ChartVector, ChartVector> split_parts(const ChartVector& x);

namespace detail {
void require_same_dim(const ChartVector& a, const ChartVector& b, const char* op);
} // namespace detail

} // namespace conal
