#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "conal/chart.hpp"

namespace conal {

// The conformal model used throughout this module: a boundary point
// x in R^{n-1} lifts to the future null ray through
//     l(x) = ((1 + |x|^2)/2, x, (1 - |x|^2)/2)
// in R^{1,n} with the form <u,v> = -u0 v0 + u1 v1 + ... + un vn, and
// infinity lifts to (1/2, 0, -1/2). A sphere lifts to a unit spacelike
// vector; a point lies on the sphere iff its lift is form-orthogonal to the
// sphere lift. Moebius maps act as Lorentz matrices on the lifts; the same
// coordinates carry the hyperboloid H_n, so a boundary matrix and its causal
// extension share one representation.

/// Point of the one-point compactification R^{n-1} union {infinity}.
class ExtendedPoint {
public:
    static ExtendedPoint infinity(int boundary_dim);
    static ExtendedPoint finite(Vec p);

    bool is_infinity() const { return infinite_; }
    /// Boundary dimension n-1.
    int dim() const { return dim_; }
    const Vec& point() const;

private:
    ExtendedPoint(bool inf, int dim, Vec p)
        : infinite_(inf), dim_(dim), point_(std::move(p)) {}
    bool infinite_;
    int dim_;
    Vec point_;
};

/// Euclidean distance extended to infinity: d(inf, inf) = 0 and
/// d(finite, inf) = +infinity.
double extended_distance(const ExtendedPoint& a, const ExtendedPoint& b);

struct Hypersphere {
    Hypersphere(Vec center_, double radius_);
    Vec center;
    double radius;
};

/// Hyperplane given as the locus |x - a| = |x - b| for distinct a, b.
struct Hyperplane {
    Hyperplane(Vec a_, Vec b_);
    Vec a;
    Vec b;
};

using Sphere = std::variant<Hypersphere, Hyperplane>;

/// (n+1)x(n+1) matrix preserving the form diag(-1, 1, ..., 1) on R^{1,n}.
/// Represents both Moebius maps of the boundary and causal maps of H_n.
class CausalMatrix {
public:
    /// Chart dimension n; the matrix acts on R^{n+1}.
    static CausalMatrix identity(int dim);

    /// Validates form preservation (<= 1e-8 after renormalization). When
    /// require_future_preserving is set, also checks the time orientation:
    /// the image of the future null vector l(0) keeps a positive 0th
    /// coordinate.
    static CausalMatrix from_matrix(Mat m, bool require_future_preserving = true);

    int dim() const { return static_cast<int>(matrix_.rows()) - 1; }
    const Mat& matrix() const { return matrix_; }

    /// Max norm of L^T Q L - Q.
    double form_residual() const;
    bool future_preserving() const;

private:
    explicit CausalMatrix(Mat m) : matrix_(std::move(m)) {}
    Mat matrix_;
};

/// <u, v> = -u0 v0 + u1 v1 + ... + un vn.
double minkowski_inner(const Vec& u, const Vec& v);

/// Pull a nearly form-preserving matrix back onto O(1,n) (Newton iteration
/// on Q L^T Q L = I). Throws InvalidArgument if the input is too far away.
Mat renormalize_lorentz(Mat m);

/// Reflection in a hypersphere or hyperplane. Involutive; the hypersphere
/// case exchanges center and infinity.
ExtendedPoint reflect_sphere(const Sphere& s, const ExtendedPoint& x);

/// Reflection in the unit hypersphere, x -> x / |x|^2.
ExtendedPoint j_minus(const ExtendedPoint& x);

/// Matrix whose boundary action is x -> r A x + t (r > 0, A orthogonal).
/// Fixes infinity.
CausalMatrix make_similarity(double r, const Mat& a, const Vec& t);

/// Matrix of the reflection in a sphere of R^{boundary_dim}.
CausalMatrix make_reflection(const Sphere& s, int boundary_dim);

/// Null lift of a boundary point (see the model description above).
Vec lift_point(const ExtendedPoint& x);

/// Inverse of lift_point on the future null cone; projective in its input.
/// Throws NotNull if |<v,v>| > 1e-9 |v|^2.
ExtendedPoint unlift(const Vec& v);

/// Unit spacelike lift of the sphere bounding a ball:
/// ((1 + |c|^2 - r^2)/2, c, (1 - |c|^2 + r^2)/2) / r.
Vec lift_sphere(const Ball& b);

/// Ball whose sphere lift is the given unit spacelike vector. Requires
/// s0 + sn > 0 (otherwise the "interior" side is unbounded).
Ball unlift_sphere(const Vec& s);

/// Boundary action of a causal matrix: unlift(M l(x)), sign-normalized to
/// the future null cone. Infinity is a legal output.
ExtendedPoint apply(const CausalMatrix& m, const ExtendedPoint& x);

/// Matrix product, renormalized. apply(compose(a,b), x) = apply(a, apply(b, x)).
CausalMatrix compose(const CausalMatrix& a, const CausalMatrix& b);

/// Lorentz inverse Q L^T Q, renormalized.
CausalMatrix invert(const CausalMatrix& m);

/// Image of a ball under the boundary action. Throws ImageNotBall when the
/// pole M^{-1}(infinity) lies in the ball (the image would be unbounded).
Ball image_of_ball(const CausalMatrix& m, const Ball& b);

struct Correspondence {
    ExtendedPoint source;
    ExtendedPoint target;
};

struct FitOptions {
    /// Largest admissible boundary-coordinate residual of the fitted map on
    /// the input correspondences.
    double tolerance = 1e-7;
};

struct FitResult {
    CausalMatrix matrix;
    double residual = 0.0;
};

/// Recover the Lorentz matrix of a Moebius map from >= n+2 point
/// correspondences on the boundary of R^{n-1}:
///  1. solve the log-linear system  log l_i + log l_j = log c
///       + 2 log|x_i - x_j| - 2 log|y_i - y_j|  for the projective scales,
///  2. solve  L l(x_i) = l_i l(y_i)  for L in least squares (pairs through
///     infinity contribute direction constraints only),
///  3. rescale by 1/sqrt(c), renormalize onto O(1,n) and check orientation.
/// Errors: DegenerateConfiguration (source lifts do not span R^{n+1}),
/// ToleranceNotMet (data not Moebius-consistent), NotConal (scales come out
/// nonpositive).
FitResult fit_from_point_correspondences(const std::vector<Correspondence>& pairs,
                                         const FitOptions& options = {});

/// Least-squares hypersphere through a point cloud in R^{n-1}.
struct SphereFit {
    Vec center;
    double radius = 0.0;
    /// Max absolute geometric deviation | |p - center| - radius |.
    double residual = 0.0;
};
SphereFit fit_hypersphere(const std::vector<Vec>& points);

/// One ball of a map's domain together with sampled images of its boundary
/// sphere under the map being tested.
struct BallImageSamples {
    Ball ball;
    std::vector<Vec> image_points;
};

/// True iff, for every entry, the image samples fit a common hypersphere
/// with geometric residual <= residual_tol and positive radius. Requires at
/// least n+1 samples per ball.
bool check_ball_preserving(const std::vector<BallImageSamples>& map_samples,
                           double residual_tol = 1e-6);

} // namespace conal
