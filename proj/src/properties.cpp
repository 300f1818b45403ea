#include "conal/properties.hpp"

#include <algorithm>
#include <cmath>

#include "conal/rigidity.hpp"
#include "conal/rng.hpp"

namespace conal {

namespace {

struct Suite {
    std::vector<PropertyResult>& out;

    void record(const std::string& name, bool passed, double worst,
                const std::string& detail = "") {
        out.push_back({name, passed, worst, detail});
    }

    /// Convention used below: `worst` should stay <= `bound`.
    void record_bound(const std::string& name, double worst, double bound) {
        record(name, worst <= bound, worst,
               "worst " + std::to_string(worst) + ", bound " + std::to_string(bound));
    }
};

ChartVector random_chart_point(int dim, Rng& rng, double x0_lo = 0.2, double x0_hi = 2.0) {
    Vec x(dim);
    x[0] = std::exp(rng.uniform(std::log(x0_lo), std::log(x0_hi)));
    for (int i = 1; i < dim; ++i) x[i] = rng.uniform(-2.0, 2.0);
    return ChartVector(x);
}

ChartVector random_future_point(const ChartVector& z, Rng& rng) {
    const Ball ball = future_boundary_ball(z);
    const int d = static_cast<int>(ball.center.size());
    const Vec p = ball.center + rng.uniform(0.1, 0.85) * ball.radius * rng.unit_vec(d);
    const double t = rng.uniform(0.15, 0.9);
    Vec boundary(z.dim());
    boundary[0] = 0.0;
    boundary.tail(d) = p;
    return ChartVector(Vec(t * boundary + (1.0 - t) * z.coords()));
}

Vec random_in_box(int d, Rng& rng, double half) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.uniform(-half, half);
    return v;
}

/// Boost of V = R^{1,n-1} along a spatial unit direction; element of O(1,n-1)+.
Mat v_boost(const Vec& u, double rapidity) {
    const int n = static_cast<int>(u.size()) + 1;
    Mat b = Mat::Identity(n, n);
    const double ch = std::cosh(rapidity), sh = std::sinh(rapidity);
    b(0, 0) = ch;
    for (int i = 1; i < n; ++i) {
        b(0, i) = sh * u[i - 1];
        b(i, 0) = sh * u[i - 1];
        for (int j = 1; j < n; ++j) b(i, j) += (ch - 1.0) * u[i - 1] * u[j - 1];
    }
    return b;
}

// ---------------------------------------------------------------------------
// Jordan algebra invariants
// ---------------------------------------------------------------------------

void jordan_checks(Suite& suite, const PropertyOptions& o) {
    Rng rng(o.seed);
    const int n = o.dim;
    bool commutative = true, neutral = true;
    double identity_worst = 0.0, inverse_worst = 0.0, delta_worst = 0.0;
    for (int t = 0; t < o.trials; ++t) {
        const ChartVector x(random_in_box(n, rng, 2.0));
        const ChartVector y(random_in_box(n, rng, 2.0));
        if (jordan_mul(x, y).coords() != jordan_mul(y, x).coords()) commutative = false;
        if (jordan_mul(ChartVector::neutral(n), x).coords() != x.coords())
            neutral = false;
        const ChartVector x2 = jordan_mul(x, x);
        const Vec lhs = jordan_mul(x2, jordan_mul(x, y)).coords();
        const Vec rhs = jordan_mul(x, jordan_mul(x2, y)).coords();
        identity_worst = std::max(identity_worst, (lhs - rhs).cwiseAbs().maxCoeff());
        if (std::abs(lorentz_form(x)) >= 1e-6) {
            const ChartVector xi = jordan_inv(x);
            inverse_worst = std::max(
                inverse_worst, (jordan_mul(x, xi).coords() -
                                ChartVector::neutral(n).coords()).cwiseAbs().maxCoeff());
            delta_worst = std::max(delta_worst,
                                   std::abs(lorentz_form(xi) * lorentz_form(x) - 1.0));
        }
    }
    suite.record("jordan-commutativity", commutative, commutative ? 0.0 : 1.0,
                 "exact equality");
    suite.record("jordan-neutrality", neutral, neutral ? 0.0 : 1.0, "exact equality");
    suite.record_bound("jordan-identity", identity_worst, 1e-10);
    suite.record_bound("jordan-inverse", inverse_worst, 1e-10);
    suite.record_bound("jordan-delta-multiplicativity", delta_worst, 1e-10);
}

void cone_checks(Suite& suite, const PropertyOptions& o) {
    Rng rng(o.seed + 1);
    const int n = o.dim;
    bool convex = true, invariant = true;
    auto random_cone_point = [&] {
        Vec x(n);
        x[0] = rng.uniform(0.1, 3.0);
        x.tail(n - 1) = rng.uniform(0.0, 0.95) * x[0] * rng.unit_vec(n - 1);
        return ChartVector(x);
    };
    for (int t = 0; t < o.trials; ++t) {
        const ChartVector x = random_cone_point();
        const ChartVector y = random_cone_point();
        const double s = rng.uniform();
        if (!in_cone(ChartVector(Vec(s * x.coords() + (1.0 - s) * y.coords())),
                     ConeMode::Open))
            convex = false;
        // g = (r, A) with A a product of boosts and a spatial rotation.
        Mat a = v_boost(rng.unit_vec(n - 1), rng.uniform(-1.2, 1.2));
        a = v_boost(rng.unit_vec(n - 1), rng.uniform(-1.2, 1.2)) * a;
        Mat rot = Mat::Identity(n, n);
        rot.block(1, 1, n - 1, n - 1) = rng.haar_orthogonal(n - 1);
        a = rot * a;
        const double r = std::exp(rng.uniform(-1.5, 1.5));
        if (!in_cone(ChartVector(Vec(r * (a * x.coords()))), ConeMode::Open))
            invariant = false;
    }
    suite.record("cone-convexity", convex, convex ? 0.0 : 1.0);
    suite.record("cone-invariance", invariant, invariant ? 0.0 : 1.0,
                 "orbit of Omega under R+ x O(1,n-1)+ generators");
}

// ---------------------------------------------------------------------------
// Chart invariants
// ---------------------------------------------------------------------------

void chart_checks(Suite& suite, const PropertyOptions& o) {
    Rng rng(o.seed + 2);
    const int n = o.dim;

    double roundtrip_worst = 0.0;
    for (int t = 0; t < o.trials; ++t) {
        Vec x(n);
        x[0] = std::exp(rng.uniform(std::log(1e-3), std::log(10.0)));
        x.tail(n - 1) = random_in_box(n - 1, rng, 5.0);
        const ChartVector cx(x);
        const ChartVector back = hyperboloid_to_chart(chart_to_hyperboloid(cx));
        roundtrip_worst =
            std::max(roundtrip_worst, (back.coords() - x).cwiseAbs().maxCoeff());
    }
    suite.record_bound("chart-round-trip", roundtrip_worst, 1e-10);

    int mismatches = 0, compared = 0;
    for (int t = 0; t < o.trials; ++t) {
        const ChartVector z = random_chart_point(n, rng);
        const ChartVector x =
            (t % 2 == 0) ? random_future_point(z, rng) : random_chart_point(n, rng);
        const Vec diff = z.coords() - x.coords();
        const ChartVector cdiff(diff);
        // Guard band: predicates flip under roundoff on their boundary.
        if (std::abs(lorentz_form(cdiff)) <= 1e-8 || std::abs(diff[0]) <= 1e-8 ||
            std::abs(x.x0()) <= 1e-8)
            continue;
        ++compared;
        const bool chart_order = future_contains(z, x);
        const bool hyper_order =
            order_geq_hyperboloid(chart_to_hyperboloid(x), chart_to_hyperboloid(z));
        if (chart_order != hyper_order) ++mismatches;
    }
    suite.record("chart-order-isomorphism", mismatches == 0,
                 static_cast<double>(mismatches),
                 std::to_string(compared) + " pairs outside the guard band");

    int unbounded = 0;
    for (int t = 0; t < o.trials; ++t) {
        const ChartVector z = random_chart_point(n, rng);
        const double bound = z.coords().norm() + 2.0 * z.x0();
        Vec x(n);
        x[0] = rng.uniform(0.0, 1.1 * z.x0());
        x.tail(n - 1) =
            z.minus_part() + random_in_box(n - 1, rng, 1.5 * (z.x0() + 1.0));
        if (!(x[0] > 0.0)) continue;
        const ChartVector cx(x);
        if (future_contains(z, cx) && cx.coords().norm() > bound + 1e-12) ++unbounded;
    }
    suite.record("chart-future-boundedness", unbounded == 0,
                 static_cast<double>(unbounded), "rejection sampling over a box");

    bool segments_ok = true;
    for (int t = 0; t < std::max(o.trials / 10, 100); ++t) {
        const ChartVector z = random_chart_point(n, rng);
        const Ball ball = future_boundary_ball(z);
        // On-sphere boundary point, pulled inward by the guard band.
        const Vec p = ball.center +
                      ball.radius * (1.0 - 1e-8) * rng.unit_vec(n - 1);
        Vec boundary = Vec::Zero(n);
        boundary.tail(n - 1) = p;
        for (double t01 = 0.0; t01 < 1.0; t01 += 0.09) {
            const ChartVector gamma(Vec(t01 * boundary + (1.0 - t01) * z.coords()));
            if (!future_contains(z, gamma)) segments_ok = false;
        }
    }
    suite.record("chart-boundary-ball-consistency", segments_ok, segments_ok ? 0.0 : 1.0,
                 "segments toward sphere points stay in the future set");

    bool transitive = true;
    for (int t = 0; t < o.trials; ++t) {
        const ChartVector z = random_chart_point(n, rng);
        const ChartVector x = random_future_point(z, rng);
        const ChartVector w = random_future_point(x, rng);
        if (!(future_contains(z, x) && future_contains(x, w) && future_contains(z, w)))
            transitive = false;
    }
    suite.record("chart-order-transitivity", transitive, transitive ? 0.0 : 1.0);
}

// ---------------------------------------------------------------------------
// Moebius invariants
// ---------------------------------------------------------------------------

void moebius_checks(Suite& suite, const PropertyOptions& o) {
    Rng rng(o.seed + 3);
    const int n = o.dim;
    const int d = n - 1;

    double inner_worst = 0.0;
    for (int t = 0; t < o.trials; ++t) {
        const Vec x = random_in_box(d, rng, 4.0);
        const Vec y = random_in_box(d, rng, 4.0);
        const double lhs = minkowski_inner(lift_point(ExtendedPoint::finite(x)),
                                           lift_point(ExtendedPoint::finite(y)));
        inner_worst =
            std::max(inner_worst, std::abs(lhs + 0.5 * (x - y).squaredNorm()));
    }
    suite.record_bound("moebius-lift-inner-product", inner_worst, 1e-10);

    double limit_worst = 0.0;
    for (int t = 0; t < std::max(o.trials / 10, 100); ++t) {
        const Vec xm = random_in_box(d, rng, 2.0);
        Vec chart = Vec::Zero(n);
        chart.tail(d) = xm;
        chart[0] = 1e-6;
        const Vec y = chart_to_hyperboloid(ChartVector(chart)).coords();
        const Vec lift = lift_point(ExtendedPoint::finite(xm));
        limit_worst = std::max(
            limit_worst, (y / y.norm() - lift / lift.norm()).cwiseAbs().maxCoeff());
    }
    suite.record_bound("moebius-limit-identity", limit_worst, 1e-5);

    double invol_worst = 0.0;
    for (int t = 0; t < std::max(o.trials / 10, 100); ++t) {
        Sphere s = (t % 2 == 0)
                       ? Sphere(Hypersphere(random_in_box(d, rng, 2.0),
                                            rng.uniform(0.2, 3.0)))
                       : Sphere(Hyperplane(random_in_box(d, rng, 2.0),
                                           random_in_box(d, rng, 2.0) +
                                               rng.unit_vec(d)));
        const Mat m = make_reflection(s, d).matrix();
        invol_worst = std::max(
            invol_worst,
            (m * m - Mat::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff());
    }
    suite.record_bound("moebius-reflection-involutive", invol_worst, 1e-10);

    double compose_worst = 0.0;
    for (int t = 0; t < std::max(o.trials / 10, 100); ++t) {
        const CausalMatrix a = random_group_element(n, o.seed + 100 + t, 4).first;
        const CausalMatrix b = random_group_element(n, o.seed + 200 + t, 4).first;
        const ExtendedPoint x = ExtendedPoint::finite(random_in_box(d, rng, 2.0));
        const ExtendedPoint lhs = apply(compose(a, b), x);
        const ExtendedPoint rhs = apply(a, apply(b, x));
        compose_worst = std::max(compose_worst, extended_distance(lhs, rhs));
    }
    suite.record_bound("moebius-composition-consistency", compose_worst, 1e-9);

    double continuation_worst = 0.0;
    for (int t = 0; t < 6; ++t) {
        const CausalMatrix m = random_group_element(n, o.seed + 300 + t, 5).first;
        Vec offset = Vec::Zero(d);
        offset[0] = 2.0;
        bool usable = true;
        std::vector<Correspondence> left, right;
        for (int k = 0; k < n + 4 && usable; ++k) {
            for (int side = 0; side < 2; ++side) {
                const Vec c = side == 0 ? Vec(-offset) : offset;
                const ExtendedPoint src =
                    ExtendedPoint::finite(c + 0.9 * rng.unit_vec(d) *
                                              (0.2 + 0.7 * rng.uniform()));
                const ExtendedPoint dst = apply(m, src);
                if (dst.is_infinity() || dst.point().norm() > 1e5) {
                    usable = false;
                    break;
                }
                (side == 0 ? left : right).push_back({src, dst});
            }
        }
        if (!usable) continue;
        try {
            const Mat f1 = fit_from_point_correspondences(left).matrix.matrix();
            const Mat f2 = fit_from_point_correspondences(right).matrix.matrix();
            continuation_worst = std::max(continuation_worst, (f1 - f2).cwiseAbs().maxCoeff());
        } catch (const Error&) {
            continuation_worst = 1.0;
        }
    }
    suite.record_bound("moebius-unique-continuation", continuation_worst, 1e-6);

    bool detection_ok = true;
    for (int t = 0; t < std::max(o.trials / 20, 50); ++t) {
        CausalMatrix m = make_similarity(std::exp(rng.uniform(-1.0, 1.0)),
                                         rng.haar_orthogonal(d),
                                         random_in_box(d, rng, 2.0));
        if (t % 2 == 1)
            m = compose(make_reflection(Hypersphere(random_in_box(d, rng, 1.0), 1.0), d),
                        m);
        const Vec winf = m.matrix() * lift_point(ExtendedPoint::infinity(d));
        const Vec linf = lift_point(ExtendedPoint::infinity(d));
        const double align = (winf / winf.norm() - linf / linf.norm()).norm();
        const bool fixes_infinity =
            std::min(align, (winf / winf.norm() + linf / linf.norm()).norm()) <= 1e-9;
        bool ratios = true;
        for (int k = 0; k < 8; ++k) {
            const Vec a = random_in_box(d, rng, 2.0);
            const Vec b = a + rng.unit_vec(d) * rng.uniform(0.5, 2.0);
            const Vec c = a + rng.unit_vec(d) * rng.uniform(0.5, 2.0);
            const auto fa = apply(m, ExtendedPoint::finite(a));
            const auto fb = apply(m, ExtendedPoint::finite(b));
            const auto fc = apply(m, ExtendedPoint::finite(c));
            if (fa.is_infinity() || fb.is_infinity() || fc.is_infinity()) {
                ratios = false;
                break;
            }
            const double lhs = (fa.point() - fb.point()).norm() /
                               (fa.point() - fc.point()).norm();
            const double rhs = (a - b).norm() / (a - c).norm();
            if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, rhs)) ratios = false;
        }
        if (fixes_infinity != ratios) detection_ok = false;
    }
    suite.record("moebius-similarity-detection", detection_ok, detection_ok ? 0.0 : 1.0,
                 "fixes infinity iff distance ratios are preserved");

    if (n >= 3) {
        bool tangency_ok = true;
        for (int t = 0; t < std::max(o.trials / 20, 50); ++t) {
            const Ball b(random_in_box(d, rng, 2.0), rng.uniform(0.5, 2.0));
            const Vec x = b.center + rng.uniform(0.0, 0.9) * b.radius * rng.unit_vec(d);
            const double delta = 0.5 * (b.radius - (x - b.center).norm());
            Vec u = rng.unit_vec(d);
            if ((x - b.center).norm() > 1e-12) {
                const Vec axis = (x - b.center).normalized();
                u -= u.dot(axis) * axis;
                while (u.norm() < 1e-9) {
                    u = rng.unit_vec(d);
                    u -= u.dot(axis) * axis;
                }
                u.normalize();
            }
            const Vec a1 = x - delta * u, a2 = x + delta * u;
            const auto contained = [&](const Vec& a, double r) {
                return (a - b.center).norm() + r <= b.radius + 1e-12;
            };
            if (!contained(a1, delta) || !contained(a2, delta)) tangency_ok = false;
            if (std::abs((a1 - a2).norm() - 2.0 * delta) > 1e-12) tangency_ok = false;
            if ((0.5 * (a1 + a2) - x).norm() > 1e-12) tangency_ok = false;
            // Boundary point: an externally tangent ball meets B only at x.
            const Vec xb = b.center + b.radius * rng.unit_vec(d);
            const double dp = rng.uniform(0.1, 1.0);
            const Vec a3 = xb + dp * (xb - b.center).normalized();
            if (std::abs((a3 - b.center).norm() - (b.radius + dp)) > 1e-12)
                tangency_ok = false;
            const Vec touch = (dp * b.center + b.radius * a3) / (b.radius + dp);
            if ((touch - xb).norm() > 1e-10) tangency_ok = false;
        }
        suite.record("moebius-tangency-witnesses", tangency_ok, tangency_ok ? 0.0 : 1.0,
                     "interior/boundary ball witnesses");
    }

    double duality_worst = 0.0;
    for (int t = 0; t < std::max(o.trials / 20, 50); ++t) {
        const CausalMatrix m = random_group_element(n, o.seed + 400 + t, 5).first;
        const Ball b(random_in_box(d, rng, 1.5), rng.uniform(0.3, 1.5));
        Ball image = b;
        try {
            image = image_of_ball(m, b);
        } catch (const ImageNotBall&) {
            continue;
        }
        for (int k = 0; k < 6; ++k) {
            const Vec p = b.center + b.radius * rng.unit_vec(d);
            const auto q = apply(m, ExtendedPoint::finite(p));
            if (q.is_infinity()) continue;
            duality_worst = std::max(
                duality_worst,
                std::abs((q.point() - image.center).norm() - image.radius));
        }
    }
    suite.record_bound("moebius-sphere-image-duality", duality_worst, 1e-9);
}

// ---------------------------------------------------------------------------
// Rigidity invariants
// ---------------------------------------------------------------------------

void rigidity_checks(Suite& suite, const PropertyOptions& o) {
    Rng rng(o.seed + 4);
    const int n = o.dim;

    bool closure_ok = true;
    for (int t = 0; t < 4; ++t) {
        const ConalOracle f =
            oracle_from_matrix(random_group_element(n, o.seed + 500 + t, 4).first);
        const ConalOracle g =
            oracle_from_matrix(random_group_element(n, o.seed + 600 + t, 4).first);
        const ConalOracle h = ConalOracle::from_function(
            n, [f, g](const ChartVector& x) { return g.eval(f.eval(x)); });
        try {
            spot_check_conal(h, o.seed + t, 24);
        } catch (const NotConal&) {
            closure_ok = false;
        }
    }
    suite.record("rigidity-conal-closure", closure_ok, closure_ok ? 0.0 : 1.0,
                 "compositions stay order-preserving on sampled pairs");

    double sqrt2_worst = 0.0;
    double ball_worst = 0.0;
    double exact_worst = 0.0;
    double inject_offset = o.inject_perturbation ? 1e-3 : 0.0;
    const int pipeline_trials = std::clamp(o.trials / 2000, 2, 8);
    for (int t = 0; t < pipeline_trials; ++t) {
        const std::uint64_t seed = o.seed + 700 + t;
        const auto truth = random_group_element(n, seed, 2 + (t % 5));
        const ConalOracle f = oracle_from_matrix(truth.first);
        RecoverParams params;
        params.seed = seed;
        params.limit_tolerance = 1e-11;
        RecoverOutcome outcome = recover_mobius(f, params);
        sqrt2_worst = std::max(sqrt2_worst, outcome.sqrt2_violation);

        Mat recovered = outcome.matrix.matrix();
        recovered(0, 0) += inject_offset;
        const Mat truth_m = truth.first.matrix();
        exact_worst = std::max(exact_worst, std::min((recovered - truth_m).norm(),
                                                     (recovered + truth_m).norm()));

        for (int k = 0; k < 12; ++k) {
            const ChartVector base = random_chart_point(n, rng);
            const ChartVector zp = random_future_point(base, rng);
            ChartVector fz = zp;
            try {
                fz = f.eval(zp);
            } catch (const Error&) {
                continue;
            }
            try {
                const Ball predicted =
                    image_of_ball(outcome.matrix, future_boundary_ball(zp));
                const Ball actual = future_boundary_ball(fz);
                ball_worst = std::max(
                    ball_worst,
                    std::max((predicted.center - actual.center).cwiseAbs().maxCoeff(),
                             std::abs(predicted.radius - actual.radius)));
            } catch (const ImageNotBall&) {
            }
        }
    }
    suite.record_bound("rigidity-sqrt2-bound", sqrt2_worst, 1e-9);
    suite.record_bound("rigidity-ball-onto-ball", ball_worst, 1e-6);
    suite.record_bound("rigidity-recovery-exactness", exact_worst, 1e-6);

    bool injective_ok = true;
    double injective_worst = 1.0;
    for (int t = 0; t < 3; ++t) {
        const auto m1 = random_group_element(n, o.seed + 800 + t, 4).first;
        const auto m2 = random_group_element(n, o.seed + 900 + t, 4).first;
        if ((m1.matrix() - m2.matrix()).norm() < 1e-3) continue;
        RecoverParams params;
        params.seed = o.seed + t;
        const Mat r1 = recover_mobius(oracle_from_matrix(m1), params).matrix.matrix();
        const Mat r2 = recover_mobius(oracle_from_matrix(m2), params).matrix.matrix();
        const double dist = (r1 - r2).norm();
        injective_worst = std::min(injective_worst, dist);
        if (dist < 1e-4) injective_ok = false;
    }
    suite.record("rigidity-boundary-injectivity", injective_ok, injective_worst,
                 "distinct elements recover distinct boundary maps");
}

} // namespace

std::vector<PropertyResult> run_property_suite(const PropertyOptions& options) {
    if (options.dim < 2) throw InvalidArgument("property suite: dim must be >= 2");
    if (options.trials <= 0) throw InvalidArgument("property suite: trials must be positive");
    std::vector<PropertyResult> results;
    Suite suite{results};
    jordan_checks(suite, options);
    cone_checks(suite, options);
    chart_checks(suite, options);
    moebius_checks(suite, options);
    rigidity_checks(suite, options);
    return results;
}

bool all_passed(const std::vector<PropertyResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const PropertyResult& r) { return r.passed; });
}

} // namespace conal
