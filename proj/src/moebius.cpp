#include "conal/moebius.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace conal {

namespace {

Vec form_signature(int size) {
    Vec q = Vec::Ones(size);
    q[0] = -1.0;
    return q;
}

/// Q L^T Q, the inverse of an exactly form-preserving L.
Mat lorentz_adjoint(const Mat& m) {
    const Vec q = form_signature(static_cast<int>(m.rows()));
    return q.asDiagonal() * m.transpose() * q.asDiagonal();
}

/// Conversion between (v0, v, vn) and the null-pair coordinates
/// (p, x, q) = (v0 + vn, v, v0 - vn), in which similarities are block
/// triangular.
Mat from_pxq(const Mat& pxq) {
    const int size = static_cast<int>(pxq.rows());
    Mat c = Mat::Zero(size, size);
    c(0, 0) = 1.0;
    c(0, size - 1) = 1.0;
    for (int i = 1; i < size - 1; ++i) c(i, i) = 1.0;
    c(size - 1, 0) = 1.0;
    c(size - 1, size - 1) = -1.0;
    Mat cinv = c * 0.5;
    for (int i = 1; i < size - 1; ++i) cinv(i, i) = 1.0;
    return cinv * pxq * c;
}

constexpr double kUnliftInfinityTol = 1e-12;

} // namespace

ExtendedPoint ExtendedPoint::infinity(int boundary_dim) {
    if (boundary_dim < 1) throw InvalidArgument("ExtendedPoint: boundary dimension >= 1");
    return ExtendedPoint(true, boundary_dim, Vec());
}

ExtendedPoint ExtendedPoint::finite(Vec p) {
    if (p.size() < 1) throw InvalidArgument("ExtendedPoint: empty coordinate vector");
    if (!p.allFinite()) throw InvalidArgument("ExtendedPoint: coordinates must be finite");
    const int d = static_cast<int>(p.size());
    return ExtendedPoint(false, d, std::move(p));
}

const Vec& ExtendedPoint::point() const {
    if (infinite_) throw InvalidArgument("ExtendedPoint: infinity has no coordinates");
    return point_;
}

double extended_distance(const ExtendedPoint& a, const ExtendedPoint& b) {
    if (a.is_infinity() && b.is_infinity()) return 0.0;
    if (a.is_infinity() || b.is_infinity())
        return std::numeric_limits<double>::infinity();
    return (a.point() - b.point()).norm();
}

Hypersphere::Hypersphere(Vec center_, double radius_)
    : center(std::move(center_)), radius(radius_) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidArgument("Hypersphere radius must be positive");
}

Hyperplane::Hyperplane(Vec a_, Vec b_) : a(std::move(a_)), b(std::move(b_)) {
    if (a.size() != b.size()) throw DimensionMismatch("Hyperplane: a and b sizes differ");
    if ((a - b).norm() <= 1e-12)
        throw InvalidArgument("Hyperplane: defining points must be distinct");
}

CausalMatrix CausalMatrix::identity(int dim) {
    return CausalMatrix(Mat::Identity(dim + 1, dim + 1));
}

CausalMatrix CausalMatrix::from_matrix(Mat m, bool require_future_preserving) {
    if (m.rows() != m.cols() || m.rows() < 3)
        throw InvalidArgument("CausalMatrix must be square of size >= 3");
    if (!m.allFinite()) throw InvalidArgument("CausalMatrix entries must be finite");
    Mat normalized = renormalize_lorentz(m);
    CausalMatrix result(std::move(normalized));
    if (result.form_residual() > 1e-8)
        throw InvalidArgument("matrix does not preserve the Lorentz form");
    if (require_future_preserving && !result.future_preserving())
        throw InvalidArgument("matrix reverses the time orientation of the null cone");
    return result;
}

double CausalMatrix::form_residual() const {
    const Vec q = form_signature(static_cast<int>(matrix_.rows()));
    Mat err = matrix_.transpose() * q.asDiagonal() * matrix_ - Mat(q.asDiagonal());
    return err.cwiseAbs().maxCoeff();
}

bool CausalMatrix::future_preserving() const {
    const int size = static_cast<int>(matrix_.rows());
    Vec l0 = Vec::Zero(size);
    l0[0] = 0.5;
    l0[size - 1] = 0.5;
    return (matrix_ * l0)[0] > 0.0;
}

double minkowski_inner(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw DimensionMismatch("minkowski_inner: sizes differ");
    return -u[0] * v[0] + u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

Mat renormalize_lorentz(Mat m) {
    const int size = static_cast<int>(m.rows());
    const Mat eye = Mat::Identity(size, size);
    for (int iter = 0; iter < 24; ++iter) {
        Mat err = lorentz_adjoint(m) * m - eye;
        const double e = err.cwiseAbs().maxCoeff();
        if (e < 1e-15) return m;
        if (e > 0.9)
            throw InvalidArgument("renormalize_lorentz: matrix too far from O(1,n)");
        m = m * (eye - 0.5 * err);
    }
    return m;
}

ExtendedPoint reflect_sphere(const Sphere& s, const ExtendedPoint& x) {
    if (const auto* hs = std::get_if<Hypersphere>(&s)) {
        if (x.is_infinity()) return ExtendedPoint::finite(hs->center);
        Vec d = x.point() - hs->center;
        const double dd = d.squaredNorm();
        if (dd == 0.0) return ExtendedPoint::infinity(x.dim());
        return ExtendedPoint::finite(hs->center + (hs->radius * hs->radius / dd) * d);
    }
    const auto& hp = std::get<Hyperplane>(s);
    if (x.is_infinity()) return x;
    Vec u = hp.b - hp.a;
    u /= u.norm();
    Vec mid = 0.5 * (hp.a + hp.b);
    return ExtendedPoint::finite(x.point() - 2.0 * (x.point() - mid).dot(u) * u);
}

ExtendedPoint j_minus(const ExtendedPoint& x) {
    return reflect_sphere(Hypersphere(Vec::Zero(x.dim()), 1.0), x);
}

CausalMatrix make_similarity(double r, const Mat& a, const Vec& t) {
    const int d = static_cast<int>(t.size());
    if (!(r > 0.0) || !std::isfinite(r))
        throw InvalidArgument("make_similarity: scale must be positive");
    if (a.rows() != d || a.cols() != d)
        throw DimensionMismatch("make_similarity: rotation size must match translation");
    Mat ortho_err = a.transpose() * a - Mat::Identity(d, d);
    if (ortho_err.cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidArgument("make_similarity: matrix is not orthogonal");
    // In (p, x, q) coordinates the action on lifts (1, x, |x|^2) of
    // x -> r A x + t is p' = p/r, x' = A x + (t/r) p, q' = r q + 2 t.(A x) + (|t|^2/r) p.
    const int size = d + 2;
    Mat pxq = Mat::Zero(size, size);
    pxq(0, 0) = 1.0 / r;
    pxq.block(1, 0, d, 1) = t / r;
    pxq.block(1, 1, d, d) = a;
    pxq(size - 1, 0) = t.squaredNorm() / r;
    pxq.block(size - 1, 1, 1, d) = 2.0 * (a.transpose() * t).transpose();
    pxq(size - 1, size - 1) = r;
    return CausalMatrix::from_matrix(from_pxq(pxq));
}

CausalMatrix make_reflection(const Sphere& s, int boundary_dim) {
    const int size = boundary_dim + 2;
    Vec lift(size);
    if (const auto* hs = std::get_if<Hypersphere>(&s)) {
        if (hs->center.size() != boundary_dim)
            throw DimensionMismatch("make_reflection: sphere dimension mismatch");
        lift = lift_sphere(Ball(hs->center, hs->radius));
    } else {
        const auto& hp = std::get<Hyperplane>(s);
        if (hp.a.size() != boundary_dim)
            throw DimensionMismatch("make_reflection: hyperplane dimension mismatch");
        Vec u = hp.b - hp.a;
        u /= u.norm();
        const double offset = 0.5 * (hp.a + hp.b).dot(u);
        // Hyperplane {x.u = offset} lifts to the unit spacelike (offset, u, -offset).
        lift[0] = offset;
        lift.segment(1, boundary_dim) = u;
        lift[size - 1] = -offset;
    }
    // Lorentz reflection in the spacelike lift: v -> v - 2 <v,s> s.
    Vec qs = lift;
    qs[0] = -qs[0];
    Mat m = Mat::Identity(size, size) - 2.0 * lift * qs.transpose();
    // Reflections in spacelike lifts fix a timelike direction, so they are
    // always future-preserving.
    return CausalMatrix::from_matrix(m);
}

Vec lift_point(const ExtendedPoint& x) {
    const int size = x.dim() + 2;
    Vec v(size);
    if (x.is_infinity()) {
        v.setZero();
        v[0] = 0.5;
        v[size - 1] = -0.5;
        return v;
    }
    const double s = x.point().squaredNorm();
    v[0] = 0.5 * (1.0 + s);
    v.segment(1, x.dim()) = x.point();
    v[size - 1] = 0.5 * (1.0 - s);
    return v;
}

ExtendedPoint unlift(const Vec& v) {
    const int size = static_cast<int>(v.size());
    if (size < 3) throw InvalidArgument("unlift: vector too short");
    const double nn = v.squaredNorm();
    if (nn == 0.0) throw InvalidArgument("unlift: zero vector");
    if (std::abs(minkowski_inner(v, v)) > 1e-9 * nn)
        throw NotNull("unlift: vector is not on the null cone");
    Vec w = v[0] < 0.0 ? Vec(-v) : v;
    const double s = w[0] + w[size - 1];
    if (std::abs(s) <= kUnliftInfinityTol * w.norm())
        return ExtendedPoint::infinity(size - 2);
    return ExtendedPoint::finite(w.segment(1, size - 2) / s);
}

Vec lift_sphere(const Ball& b) {
    const int d = static_cast<int>(b.center.size());
    Vec s(d + 2);
    const double c2 = b.center.squaredNorm();
    const double r2 = b.radius * b.radius;
    s[0] = 0.5 * (1.0 + c2 - r2);
    s.segment(1, d) = b.center;
    s[d + 1] = 0.5 * (1.0 - c2 + r2);
    return s / b.radius;
}

Ball unlift_sphere(const Vec& s) {
    const int size = static_cast<int>(s.size());
    const double sum = s[0] + s[size - 1];
    if (!(sum > 0.0))
        throw InvalidArgument("unlift_sphere: lift does not bound a ball");
    return Ball(Vec(s.segment(1, size - 2) / sum), 1.0 / sum);
}

ExtendedPoint apply(const CausalMatrix& m, const ExtendedPoint& x) {
    if (x.dim() != m.dim() - 1)
        throw DimensionMismatch("apply: point dimension does not match matrix");
    Vec w = m.matrix() * lift_point(x);
    if (w[0] < 0.0) w = -w; // keep the image on the future null cone
    const double s = w[0] + w[w.size() - 1];
    if (std::abs(s) <= kUnliftInfinityTol * w.norm())
        return ExtendedPoint::infinity(x.dim());
    return ExtendedPoint::finite(w.segment(1, x.dim()) / s);
}

CausalMatrix compose(const CausalMatrix& a, const CausalMatrix& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("compose: dimension mismatch");
    return CausalMatrix::from_matrix(a.matrix() * b.matrix(), false);
}

CausalMatrix invert(const CausalMatrix& m) {
    return CausalMatrix::from_matrix(lorentz_adjoint(m.matrix()), false);
}

Ball image_of_ball(const CausalMatrix& m, const Ball& b) {
    if (static_cast<int>(b.center.size()) != m.dim() - 1)
        throw DimensionMismatch("image_of_ball: ball dimension does not match matrix");
    const Vec s = m.matrix() * lift_sphere(b);
    const double sum = s[0] + s[s.size() - 1];
    // sum <= 0 means the pole M^{-1}(infinity) lies on or inside the ball,
    // so the image of the interior is unbounded.
    if (sum <= 1e-12 * s.norm())
        throw ImageNotBall("image_of_ball: the pole lies in the ball");
    return unlift_sphere(s);
}

FitResult fit_from_point_correspondences(const std::vector<Correspondence>& pairs,
                                         const FitOptions& options) {
    const int m = static_cast<int>(pairs.size());
    if (m == 0) throw InvalidArgument("fit: no correspondences");
    const int d = pairs.front().source.dim(); // boundary dimension n-1
    const int n = d + 1;
    const int size = n + 1; // lift space dimension
    if (m < n + 2)
        throw InvalidArgument("fit: need at least n+2 = " + std::to_string(n + 2) +
                              " correspondences, got " + std::to_string(m));
    for (const auto& p : pairs)
        if (p.source.dim() != d || p.target.dim() != d)
            throw DimensionMismatch("fit: correspondences of mixed dimension");
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            if (extended_distance(pairs[i].source, pairs[j].source) <= 1e-12)
                throw InvalidArgument("fit: sources must be pairwise distinct");
            if (extended_distance(pairs[i].target, pairs[j].target) <= 1e-12)
                throw InvalidArgument("fit: targets must be pairwise distinct (injectivity)");
        }

    std::vector<Vec> src_lift(m), dst_lift(m);
    Mat span(size, m);
    for (int i = 0; i < m; ++i) {
        src_lift[i] = lift_point(pairs[i].source);
        dst_lift[i] = lift_point(pairs[i].target);
        span.col(i) = src_lift[i];
    }
    Eigen::JacobiSVD<Mat> svd(span);
    const double smax = svd.singularValues()[0];
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-10 * smax) ++rank;
    if (rank < size)
        throw DegenerateConfiguration("fit: source lifts span only " + std::to_string(rank) +
                                      " of " + std::to_string(size) + " dimensions");

    // Step 1: projective scales from mutual distances. Pairs through
    // infinity carry no distance and join step 2 only.
    std::vector<int> finite_idx;
    for (int i = 0; i < m; ++i)
        if (!pairs[i].source.is_infinity() && !pairs[i].target.is_infinity())
            finite_idx.push_back(i);
    const int f = static_cast<int>(finite_idx.size());
    const int rows1 = f * (f - 1) / 2;
    Mat a1 = Mat::Zero(std::max(rows1, 1), f + 1);
    Vec b1 = Vec::Zero(std::max(rows1, 1));
    int row = 0;
    for (int ii = 0; ii < f; ++ii)
        for (int jj = ii + 1; jj < f; ++jj) {
            const auto& pi = pairs[finite_idx[ii]];
            const auto& pj = pairs[finite_idx[jj]];
            const double dx = (pi.source.point() - pj.source.point()).norm();
            const double dy = (pi.target.point() - pj.target.point()).norm();
            a1(row, ii) = 1.0;
            a1(row, jj) = 1.0;
            a1(row, f) = -1.0; // -log c
            b1[row] = 2.0 * std::log(dx) - 2.0 * std::log(dy);
            ++row;
        }
    Vec sol = a1.completeOrthogonalDecomposition().solve(b1);
    std::vector<double> lambda(m, 0.0);
    for (int ii = 0; ii < f; ++ii) lambda[finite_idx[ii]] = std::exp(sol[ii]);
    const double c = f > 0 ? std::exp(sol[f]) : 1.0;

    // Step 2: linear least squares for L, row-major vec(L).
    int rows2 = 0;
    for (int i = 0; i < m; ++i) rows2 += size;
    Mat a2 = Mat::Zero(rows2, size * size);
    Vec b2 = Vec::Zero(rows2);
    row = 0;
    for (int i = 0; i < m; ++i) {
        const double w = 1.0 / src_lift[i].norm();
        if (lambda[i] > 0.0) {
            // L v_i = lambda_i w_i
            for (int r0 = 0; r0 < size; ++r0) {
                a2.block(row, r0 * size, 1, size) = w * src_lift[i].transpose();
                b2[row] = w * lambda[i] * dst_lift[i][r0];
                ++row;
            }
        } else {
            // Direction-only constraint: the image must be proportional to
            // the target lift. Project onto the Euclidean complement.
            Vec t = dst_lift[i] / dst_lift[i].norm();
            Mat proj = Mat::Identity(size, size) - t * t.transpose();
            for (int r0 = 0; r0 < size; ++r0) {
                for (int k = 0; k < size; ++k)
                    a2.block(row, k * size, 1, size) = w * proj(r0, k) * src_lift[i].transpose();
                b2[row] = 0.0;
                ++row;
            }
        }
    }
    Vec lvec = a2.colPivHouseholderQr().solve(b2);
    Mat l(size, size);
    for (int r0 = 0; r0 < size; ++r0) l.row(r0) = lvec.segment(r0 * size, size).transpose();

    // Step 3: fix the Lorentz normalization and the gauge.
    l /= std::sqrt(c);
    {
        const Vec q = form_signature(size);
        Mat err = l.transpose() * q.asDiagonal() * l - Mat(q.asDiagonal());
        if (err.cwiseAbs().maxCoeff() > 0.5)
            throw ToleranceNotMet("fit: correspondences are not Moebius-consistent");
    }
    l = renormalize_lorentz(l);

    for (int i = 0; i < m; ++i) {
        const Vec w = l * src_lift[i];
        if (w.dot(dst_lift[i]) <= 0.0)
            throw NotConal("fit: a projective scale came out nonpositive");
    }

    CausalMatrix result = CausalMatrix::from_matrix(l);
    double residual = 0.0;
    for (int i = 0; i < m; ++i)
        residual = std::max(residual,
                            extended_distance(apply(result, pairs[i].source), pairs[i].target));
    if (!(residual <= options.tolerance))
        throw ToleranceNotMet("fit: residual " + std::to_string(residual) +
                              " exceeds tolerance");
    return FitResult{std::move(result), residual};
}

SphereFit fit_hypersphere(const std::vector<Vec>& points) {
    if (points.empty()) throw InvalidArgument("fit_hypersphere: no points");
    const int d = static_cast<int>(points.front().size());
    const int m = static_cast<int>(points.size());
    if (m < d + 1)
        throw InvalidArgument("fit_hypersphere: need at least d+1 points");
    // |p|^2 - 2 c.p + (|c|^2 - r^2) = 0, linear in (c, e).
    Mat a(m, d + 1);
    Vec b(m);
    for (int i = 0; i < m; ++i) {
        a.block(i, 0, 1, d) = -2.0 * points[i].transpose();
        a(i, d) = 1.0;
        b[i] = -points[i].squaredNorm();
    }
    Vec sol = a.colPivHouseholderQr().solve(b);
    SphereFit fit;
    fit.center = sol.head(d);
    const double r2 = fit.center.squaredNorm() - sol[d];
    fit.radius = r2 > 0.0 ? std::sqrt(r2) : 0.0;
    for (int i = 0; i < m; ++i)
        fit.residual = std::max(fit.residual,
                                std::abs((points[i] - fit.center).norm() - fit.radius));
    return fit;
}

bool check_ball_preserving(const std::vector<BallImageSamples>& map_samples,
                           double residual_tol) {
    if (map_samples.empty()) throw InvalidArgument("check_ball_preserving: no samples");
    for (const auto& entry : map_samples) {
        const int d = static_cast<int>(entry.ball.center.size());
        if (static_cast<int>(entry.image_points.size()) < d + 2)
            throw InvalidArgument("check_ball_preserving: need at least n+1 samples per ball");
        SphereFit fit = fit_hypersphere(entry.image_points);
        if (!(fit.radius > 0.0) || fit.residual > residual_tol) return false;
    }
    return true;
}

} // namespace conal
