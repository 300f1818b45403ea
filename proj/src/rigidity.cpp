#include "conal/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conal/rng.hpp"

namespace conal {

namespace {

constexpr double kHugeDeviation = 1e300;

ChartVector apex_point(const Vec& center, double height) {
    Vec z(center.size() + 1);
    z[0] = height;
    z.tail(center.size()) = center;
    return ChartVector(z);
}

/// Boundary points spread over the interior of a ball, distinct and in
/// rank-sufficient position for fitting. Shells at {0.3, 0.6, 0.9} of the
/// radius; for a one-dimensional boundary the radii are drawn continuously
/// so the points stay pairwise distinct.
std::vector<Vec> sample_ball_points(const Ball& b, int count, Rng& rng) {
    const int d = static_cast<int>(b.center.size());
    static const double kShells[3] = {0.3, 0.6, 0.9};
    std::vector<Vec> points;
    points.reserve(count);
    for (int k = 0; k < count; ++k) {
        double frac;
        Vec dir;
        if (d == 1) {
            frac = rng.uniform(0.1, 0.95);
            dir = Vec::Constant(1, rng.uniform() < 0.5 ? -1.0 : 1.0);
        } else {
            frac = kShells[k % 3];
            dir = rng.unit_vec(d);
        }
        points.push_back(b.center + frac * b.radius * dir);
    }
    return points;
}

bool rank_sufficient(const std::vector<Vec>& points, int lift_size) {
    Mat span(lift_size, static_cast<int>(points.size()));
    for (int i = 0; i < static_cast<int>(points.size()); ++i)
        span.col(i) = lift_point(ExtendedPoint::finite(points[i]));
    Eigen::JacobiSVD<Mat> svd(span);
    const auto& sv = svd.singularValues();
    if (sv.size() < lift_size) return false;
    return sv[lift_size - 1] > 1e-10 * sv[0];
}

bool pairwise_distinct(const std::vector<Vec>& points, double tol) {
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if ((points[i] - points[j]).norm() <= tol) return false;
    return true;
}

/// Conjugator candidates: identity, the causal inversion, and the causal
/// inversion after a translation. The translations are a fixed seeded set;
/// the base oracle is a black box, so the admissible one is found by trial.
std::vector<CausalMatrix> candidate_conjugators(int dim) {
    std::vector<CausalMatrix> out;
    out.push_back(CausalMatrix::identity(dim));
    const CausalMatrix inv = causal_inversion(dim);
    out.push_back(inv);
    Rng rng(0xC0A1u);
    static const double kRadii[4] = {0.5, 1.0, 2.0, 4.0};
    for (double radius : kRadii)
        for (int rep = 0; rep < 2; ++rep) {
            const Vec v = radius * rng.unit_vec(dim - 1);
            out.push_back(compose(inv, generator_matrix(TranslateVminus{v}, dim)));
        }
    return out;
}

struct AdmissibleBase {
    ChartVector base;
    CausalMatrix conjugator;
    ConalOracle oracle; // conjugator o f
};

/// Find a base apex above `center` and a conjugator phi so that
/// (phi o f)(base) lies in the chart. Prefers bases whose image keeps a
/// healthy 0th coordinate: the image ball radius bounds the spread of the
/// boundary targets, and a collapsed image degrades the fit.
AdmissibleBase find_admissible_base(const ConalOracle& f, const Vec& center,
                                    double start_height) {
    const int dim = f.dim();
    const auto candidates = candidate_conjugators(dim);
    std::optional<AdmissibleBase> fallback;
    for (int j = 0; j <= 6; ++j) {
        const double h = start_height * std::ldexp(1.0, -j);
        const ChartVector z = apex_point(center, h);
        for (const auto& phi : candidates) {
            ConalOracle g = f.conjugated(phi);
            double image_height;
            try {
                image_height = g.eval(z).x0();
            } catch (const NotInChartDomain&) {
                continue;
            } catch (const ChartSingularity&) {
                continue;
            }
            AdmissibleBase found{z, phi, std::move(g)};
            if (image_height >= 1e-2) return found;
            if (!fallback) fallback = std::move(found);
        }
    }
    if (fallback) return *fallback;
    throw NoAdmissibleConjugator(
        "no candidate conjugator brings the oracle base point into the chart");
}

struct CollectedCorrespondences {
    std::vector<Correspondence> pairs;
    double sqrt2_violation = 0.0;
};

/// Boundary correspondences of an already-conjugated oracle inside the
/// future boundary ball of z; both sides finite.
CollectedCorrespondences collect_ball_correspondences(const ConalOracle& g,
                                                      const ChartVector& z, int count,
                                                      const LimitOptions& base_options,
                                                      Rng& rng) {
    const int lift_size = g.dim() + 1;
    const Ball ball = future_boundary_ball(z);
    std::vector<Vec> sources;
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
        sources = sample_ball_points(ball, count, rng);
        ok = pairwise_distinct(sources, 1e-10) && rank_sufficient(sources, lift_size);
    }
    if (!ok)
        throw DegenerateConfiguration(
            "boundary sampling could not reach full lift rank");
    CollectedCorrespondences out;
    out.pairs.reserve(count);
    for (const Vec& source : sources) {
        std::vector<LimitStep> trace;
        LimitOptions options = base_options;
        options.trace = &trace;
        const Vec target = boundary_limit(g, z, source, options);
        out.sqrt2_violation =
            std::max(out.sqrt2_violation, sqrt2_bound_violation(trace, target));
        out.pairs.push_back(
            {ExtendedPoint::finite(source), ExtendedPoint::finite(target)});
    }
    return out;
}

ChartVector random_chart_point(int dim, Rng& rng) {
    Vec x(dim);
    x[0] = std::exp(rng.uniform(std::log(0.2), std::log(2.0)));
    for (int i = 1; i < dim; ++i) x[i] = rng.uniform(-2.0, 2.0);
    return ChartVector(x);
}

/// A strictly interior point of M_z^+ (along a segment toward the boundary).
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

} // namespace

ConalOracle ConalOracle::from_matrix(const CausalMatrix& m) {
    CausalMatrix copy = m;
    return ConalOracle(
        m.dim(), [copy](const ChartVector& x) { return causal_chart_action(copy, x); },
        m);
}

ConalOracle ConalOracle::from_function(int dim, EvalFn fn) {
    if (dim < 2) throw InvalidArgument("ConalOracle: dimension must be >= 2");
    return ConalOracle(dim, std::move(fn), std::nullopt);
}

ChartVector ConalOracle::eval(const ChartVector& x) const {
    if (x.dim() != dim_)
        throw DimensionMismatch("ConalOracle::eval: point dimension mismatch");
    return fn_(x);
}

ConalOracle ConalOracle::conjugated(const CausalMatrix& phi) const {
    if (phi.dim() != dim_)
        throw DimensionMismatch("ConalOracle::conjugated: dimension mismatch");
    if (matrix_) return from_matrix(compose(phi, *matrix_));
    EvalFn inner = fn_;
    CausalMatrix left = phi;
    return ConalOracle(
        dim_,
        [inner, left](const ChartVector& x) {
            return causal_chart_action(left, inner(x));
        },
        std::nullopt);
}

ChartVector causal_chart_action(const CausalMatrix& m, const ChartVector& x) {
    if (x.dim() != m.dim())
        throw DimensionMismatch("causal_chart_action: dimension mismatch");
    const HyperboloidPoint y = chart_to_hyperboloid(x);
    Vec w = m.matrix() * y.coords();
    if (w[0] + w[w.size() - 1] <= 0.0)
        throw NotInChartDomain("causal_chart_action: image leaves the chart component");
    return hyperboloid_to_chart(HyperboloidPoint(std::move(w)));
}

CausalMatrix generator_matrix(const Generator& g, int dim) {
    if (dim < 2) throw InvalidArgument("generator_matrix: dimension must be >= 2");
    const int d = dim - 1;
    if (const auto* t = std::get_if<TranslateVminus>(&g)) {
        if (static_cast<int>(t->v.size()) != d)
            throw DimensionMismatch("generator_matrix: translation size mismatch");
        return make_similarity(1.0, Mat::Identity(d, d), t->v);
    }
    if (const auto* s = std::get_if<Dilate>(&g)) {
        if (!(s->r > 0.0) || !std::isfinite(s->r))
            throw InvalidArgument("generator_matrix: dilation factor must be positive");
        return make_similarity(s->r, Mat::Identity(d, d), Vec::Zero(d));
    }
    if (const auto* r = std::get_if<Rotate>(&g)) {
        if (r->a.rows() != d || r->a.cols() != d)
            throw DimensionMismatch("generator_matrix: rotation size mismatch");
        return make_similarity(1.0, r->a, Vec::Zero(d));
    }
    // Jordan inversion x -> x^{-1}: on H_n it negates all but the last
    // coordinate, which reverses the time orientation.
    Mat m = -Mat::Identity(dim + 1, dim + 1);
    m(dim, dim) = 1.0;
    return CausalMatrix::from_matrix(std::move(m), false);
}

CausalMatrix causal_inversion(int dim) {
    Mat m = -Mat::Identity(dim + 1, dim + 1);
    m(0, 0) = 1.0;
    return CausalMatrix::from_matrix(std::move(m));
}

std::pair<CausalMatrix, GeneratorWord> random_group_element(int dim, std::uint64_t seed,
                                                            int word_length) {
    if (dim < 2) throw InvalidArgument("random_group_element: dimension must be >= 2");
    if (word_length < 0) throw InvalidArgument("random_group_element: negative word length");
    Rng rng(seed);
    std::vector<int> kinds(word_length);
    for (;;) {
        int inversions = 0;
        for (int i = 0; i < word_length; ++i) {
            kinds[i] = rng.uniform_int(0, 3);
            if (kinds[i] == 3) ++inversions;
        }
        // An odd number of inversions would reverse the time orientation
        // (the product would be order-reversing, hence not conal).
        if (inversions % 2 == 0) break;
    }
    GeneratorWord word;
    word.reserve(word_length);
    CausalMatrix product = CausalMatrix::identity(dim);
    for (int i = 0; i < word_length; ++i) {
        Generator g;
        switch (kinds[i]) {
            case 0: {
                const double radius = rng.uniform(0.0, 1.0);
                g = TranslateVminus{radius * rng.unit_vec(dim - 1)};
                break;
            }
            case 1:
                g = Dilate{std::exp(rng.uniform(-std::log(2.0), std::log(2.0)))};
                break;
            case 2:
                g = Rotate{rng.haar_orthogonal(dim - 1)};
                break;
            default:
                g = Invert{};
        }
        product = compose(generator_matrix(g, dim), product);
        word.push_back(std::move(g));
    }
    return {CausalMatrix::from_matrix(product.matrix()), std::move(word)};
}

ConalOracle oracle_from_matrix(const CausalMatrix& m) { return ConalOracle::from_matrix(m); }

Vec boundary_limit(const ConalOracle& f, const ChartVector& z, const Vec& z_minus,
                   const LimitOptions& options) {
    const int n = f.dim();
    if (z.dim() != n || static_cast<int>(z_minus.size()) != n - 1)
        throw DimensionMismatch("boundary_limit: dimension mismatch");
    const Ball ball = future_boundary_ball(z);
    if ((z_minus - ball.center).norm() > ball.radius + 1e-12)
        throw InvalidArgument("boundary_limit: z_minus outside the future boundary ball");
    Vec boundary = Vec::Zero(n);
    boundary.tail(n - 1) = z_minus;

    std::optional<ChartVector> previous;
    const int last = options.start_index + options.max_iterations;
    for (int i = options.start_index; i < last; ++i) {
        const double s = std::ldexp(1.0, -i); // 1 - t_i
        const ChartVector zi(Vec((1.0 - s) * boundary + s * z.coords()));
        const ChartVector w = f.eval(zi);
        if (options.trace) options.trace->push_back({w.x0(), w.minus_part()});
        if (previous) {
            // Monotonicity of the image sequence; skipped once consecutive
            // values are too close for the cone predicate to resolve.
            const double step = (previous->coords() - w.coords()).cwiseAbs().maxCoeff();
            const double scale =
                std::max(1.0, previous->coords().cwiseAbs().maxCoeff());
            if (step > 256.0 * std::numeric_limits<double>::epsilon() * scale &&
                !future_contains(*previous, w))
                throw NotConal("boundary_limit: image sequence is not increasing");
        }
        if (std::sqrt(2.0) * w.x0() <= options.tolerance) return w.minus_part();
        previous = w;
    }
    throw ToleranceNotMet("boundary_limit: tolerance not reached after " +
                          std::to_string(options.max_iterations) + " iterations");
}

double sqrt2_bound_violation(const std::vector<LimitStep>& trace, const Vec& limit) {
    double worst = 0.0;
    for (const auto& step : trace) {
        const double dist =
            std::sqrt(step.x0 * step.x0 + (step.minus - limit).squaredNorm());
        worst = std::max(worst, dist - std::sqrt(2.0) * step.x0);
    }
    return std::max(worst, 0.0);
}

std::vector<BoundaryPair> sample_boundary_correspondences(const ConalOracle& f,
                                                          const ChartVector& z, int count,
                                                          double tolerance,
                                                          std::uint64_t seed) {
    const int n = f.dim();
    if (count < n + 2)
        throw InvalidArgument("sample_boundary_correspondences: need at least n+2 points");
    if (!in_chart_component(z))
        throw NotInChartDomain("sample_boundary_correspondences: base must lie in the chart");
    const Ball ball = future_boundary_ball(z);
    Rng rng(seed);
    std::vector<Vec> sources;
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
        sources = sample_ball_points(ball, count, rng);
        ok = pairwise_distinct(sources, 1e-10) && rank_sufficient(sources, n + 1);
    }
    if (!ok)
        throw DegenerateConfiguration(
            "sample_boundary_correspondences: sampling could not reach full lift rank");
    std::vector<BoundaryPair> pairs;
    pairs.reserve(count);
    for (const Vec& source : sources)
        pairs.push_back({source, global_boundary_apply(f, source, tolerance)});
    return pairs;
}

ExtendedPoint global_boundary_apply(const ConalOracle& f, const Vec& z_minus,
                                    double tolerance,
                                    const std::optional<CausalMatrix>& conjugator) {
    const int dim = f.dim();
    if (static_cast<int>(z_minus.size()) != dim - 1)
        throw DimensionMismatch("global_boundary_apply: boundary point dimension mismatch");
    std::vector<CausalMatrix> candidates;
    if (conjugator)
        candidates.push_back(*conjugator);
    else
        candidates = candidate_conjugators(dim);
    for (int j = 0; j <= 8; ++j) {
        const double h = std::ldexp(1.0, -j);
        const ChartVector z = apex_point(z_minus, h);
        for (const auto& phi : candidates) {
            ConalOracle g = f.conjugated(phi);
            try {
                g.eval(z);
            } catch (const NotInChartDomain&) {
                continue;
            } catch (const ChartSingularity&) {
                continue;
            }
            LimitOptions options;
            options.tolerance = tolerance;
            const Vec limit = boundary_limit(g, z, z_minus, options);
            return apply(invert(phi), ExtendedPoint::finite(limit));
        }
    }
    throw NoAdmissibleConjugator("global_boundary_apply: no admissible conjugator for " +
                                 std::string("the requested boundary point"));
}

RecoverOutcome recover_mobius(const ConalOracle& f, const RecoverParams& params) {
    const int n = f.dim();
    const int count = params.samples > 0 ? params.samples : std::max(n + 4, 3 * (n + 1));
    if (count < n + 2)
        throw InvalidArgument("recover_mobius: need at least n+2 samples");
    spot_check_conal(f, params.seed ^ 0x5eedu);

    LimitOptions limit_options;
    limit_options.tolerance = params.limit_tolerance;
    limit_options.max_iterations = params.max_iterations;
    FitOptions fit_options{params.fit_tolerance};
    Rng rng(params.seed);

    const ChartVector base = params.base ? *params.base : ChartVector::neutral(n);
    if (!in_chart_component(base))
        throw NotInChartDomain("recover_mobius: base must lie in the chart");

    AdmissibleBase primary = find_admissible_base(f, base.minus_part(), base.x0());
    CollectedCorrespondences collected =
        collect_ball_correspondences(primary.oracle, primary.base, count, limit_options, rng);
    const FitResult fit = fit_from_point_correspondences(collected.pairs, fit_options);
    CausalMatrix recovered = compose(invert(primary.conjugator), fit.matrix);
    double sqrt2 = collected.sqrt2_violation;

    if (params.cross_validate) {
        // Disjoint second ball: offset the center past the first ball.
        Vec center2 = base.minus_part();
        center2[0] += base.x0() + 1.5;
        AdmissibleBase secondary = find_admissible_base(f, center2, 1.0);
        CollectedCorrespondences collected2 = collect_ball_correspondences(
            secondary.oracle, secondary.base, count, limit_options, rng);
        const FitResult fit2 = fit_from_point_correspondences(collected2.pairs, fit_options);
        const CausalMatrix recovered2 = compose(invert(secondary.conjugator), fit2.matrix);
        sqrt2 = std::max(sqrt2, collected2.sqrt2_violation);
        const double disagreement = (recovered.matrix() - recovered2.matrix()).norm();
        const double allowance = std::max(1e-6, 2e3 * params.limit_tolerance) *
                                 std::max(1.0, recovered.matrix().norm());
        if (disagreement > allowance)
            throw ToleranceNotMet(
                "recover_mobius: unique-continuation cross check disagrees by " +
                std::to_string(disagreement));
    }
    return RecoverOutcome{std::move(recovered), fit.residual, count, sqrt2};
}

CausalMatrix extend_to_causal(const CausalMatrix& boundary) {
    // Boundary-lift coordinates coincide with hyperboloid coordinates, so the
    // extension is the same matrix read as a map of H_n; only the invariants
    // need revalidation.
    return CausalMatrix::from_matrix(boundary.matrix());
}

RecoveryReport verify_extension(const ConalOracle& f, const CausalMatrix& extension,
                                int samples, double tolerance, std::uint64_t seed) {
    RecoveryReport report{extension, 0.0, 0, 0.0, 0.0, 0.0, false};
    const int n = f.dim();
    Rng rng(seed);

    int interior_done = 0;
    for (int attempt = 0; attempt < 100 * samples + 100 && interior_done < samples;
         ++attempt) {
        const ChartVector x = random_chart_point(n, rng);
        ChartVector fx = x;
        try {
            fx = f.eval(x);
        } catch (const Error&) {
            continue;
        }
        double deviation = kHugeDeviation;
        try {
            const ChartVector lx = causal_chart_action(extension, x);
            deviation = (fx.coords() - lx.coords()).cwiseAbs().maxCoeff();
        } catch (const Error&) {
        }
        report.max_interior_deviation = std::max(report.max_interior_deviation, deviation);
        ++interior_done;
    }

    int ball_done = 0;
    const int ball_target = std::max(1, samples / 2);
    for (int attempt = 0; attempt < 100 * ball_target + 100 && ball_done < ball_target;
         ++attempt) {
        const ChartVector z = random_chart_point(n, rng);
        ChartVector fz = z;
        try {
            fz = f.eval(z);
        } catch (const Error&) {
            continue;
        }
        Ball predicted = future_boundary_ball(z);
        try {
            predicted = image_of_ball(extension, future_boundary_ball(z));
        } catch (const ImageNotBall&) {
            continue; // pole in the ball: the comparison is undefined there
        } catch (const Error&) {
            report.max_ball_deviation = kHugeDeviation;
            ++ball_done;
            continue;
        }
        const Ball actual = future_boundary_ball(fz);
        const double deviation =
            std::max((predicted.center - actual.center).cwiseAbs().maxCoeff(),
                     std::abs(predicted.radius - actual.radius));
        report.max_ball_deviation = std::max(report.max_ball_deviation, deviation);
        ++ball_done;
    }

    // Fresh recorded sequences for the sqrt(2) bound.
    try {
        AdmissibleBase base = find_admissible_base(f, Vec::Zero(n - 1), 1.0);
        const Ball ball = future_boundary_ball(base.base);
        const int sequences = std::min(8, std::max(2, samples / 12));
        for (const Vec& p : sample_ball_points(ball, sequences, rng)) {
            std::vector<LimitStep> trace;
            LimitOptions options;
            options.trace = &trace;
            const Vec limit = boundary_limit(base.oracle, base.base, p, options);
            report.sqrt2_bound_max_violation = std::max(
                report.sqrt2_bound_max_violation, sqrt2_bound_violation(trace, limit));
        }
    } catch (const NoAdmissibleConjugator&) {
        // Not measurable for this oracle; the interior check still stands.
    }

    report.verified = interior_done > 0 &&
                      report.max_interior_deviation <= tolerance &&
                      report.max_ball_deviation <= tolerance &&
                      report.sqrt2_bound_max_violation <= tolerance;
    return report;
}

void spot_check_conal(const ConalOracle& f, std::uint64_t seed, int trials) {
    Rng rng(seed);
    const int n = f.dim();
    for (int t = 0; t < trials; ++t) {
        const ChartVector z = random_chart_point(n, rng);
        const ChartVector x = random_future_point(z, rng);
        ChartVector fz = z, fx = x;
        try {
            fz = f.eval(z);
            fx = f.eval(x);
        } catch (const NotInChartDomain&) {
            continue;
        } catch (const ChartSingularity&) {
            continue;
        }
        if (!future_contains(fz, fx))
            throw NotConal("oracle violates order preservation on a sampled pair");
    }
}

RecoveryReport run_recovery_pipeline(const ConalOracle& f, const RecoverParams& params,
                                     int verify_samples, double verify_tolerance) {
    const RecoverOutcome outcome = recover_mobius(f, params);
    const CausalMatrix extension = extend_to_causal(outcome.matrix);
    RecoveryReport report =
        verify_extension(f, extension, verify_samples, verify_tolerance, params.seed);
    report.fit_residual = outcome.fit_residual;
    report.boundary_samples_used = outcome.samples_used;
    report.sqrt2_bound_max_violation =
        std::max(report.sqrt2_bound_max_violation, outcome.sqrt2_violation);
    report.verified = report.verified &&
                      report.sqrt2_bound_max_violation <= verify_tolerance;
    return report;
}

} // namespace conal
