#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "conal/moebius.hpp"

namespace conal {

/// Black-box injective order-preserving map of the chart component,
/// evaluated pointwise. Concrete instances wrap a causal matrix acting on
/// H_n conjugated through the chart isomorphism; test stubs may wrap any
/// callable. Evaluations landing outside the chart throw NotInChartDomain.
class ConalOracle {
public:
    using EvalFn = std::function<ChartVector(const ChartVector&)>;

    static ConalOracle from_matrix(const CausalMatrix& m);
    static ConalOracle from_function(int dim, EvalFn fn);

    int dim() const { return dim_; }
    ChartVector eval(const ChartVector& x) const;

    /// The conal map phi o f. For matrix-backed oracles the composition
    /// happens on the wrapped matrix, so it stays defined even where f
    /// itself leaves the chart patch; function-backed oracles compose at
    /// the chart level and keep f's domain.
    ConalOracle conjugated(const CausalMatrix& phi) const;

private:
    ConalOracle(int dim, EvalFn fn, std::optional<CausalMatrix> m)
        : dim_(dim), fn_(std::move(fn)), matrix_(std::move(m)) {}
    int dim_;
    EvalFn fn_;
    std::optional<CausalMatrix> matrix_;
};

/// Chart action of a causal matrix: Eq-(1) lift, matrix, Eq-(2) return.
ChartVector causal_chart_action(const CausalMatrix& m, const ChartVector& x);

// Generators of the causal group in the chart picture.
struct TranslateVminus {
    Vec v; // element of V_-, length n-1
};
struct Dilate {
    double r = 1.0; // r > 0
};
struct Rotate {
    Mat a; // orthogonal (n-1)x(n-1)
};
struct Invert {};

using Generator = std::variant<TranslateVminus, Dilate, Rotate, Invert>;
using GeneratorWord = std::vector<Generator>;

/// The (n+1)x(n+1) matrix whose hyperboloid action, conjugated through the
/// chart isomorphism, is the generator's chart action (x -> x+v, x -> rx,
/// x -> (x0, A x_-), x -> x^{-1}). Note: Invert reverses the time
/// orientation; it acts on H_n as (y0, ..., y_{n-1}, yn) -> (-y0, ..., -y_{n-1}, yn).
CausalMatrix generator_matrix(const Generator& g, int dim);

/// The order-preserving inversion x -> -x^{-1}; on H_n it acts as
/// diag(1, -I, -1). Used to conjugate oracles back into the chart.
CausalMatrix causal_inversion(int dim);

/// Deterministic random word in the generators and its matrix. Translations
/// have |v| <= 1, dilations r in [1/2, 2], rotations Haar-ish on O(n-1).
/// Words carry an even number of inversions so the product is
/// order-preserving and satisfies the CausalMatrix invariants.
std::pair<CausalMatrix, GeneratorWord> random_group_element(int dim, std::uint64_t seed,
                                                            int word_length);

/// Oracle wrapping the hyperboloid action of a causal matrix.
ConalOracle oracle_from_matrix(const CausalMatrix& m);

/// One recorded step of a boundary-limit sequence.
struct LimitStep {
    double x0 = 0.0;  // 0th coordinate of f(z_i)
    Vec minus;        // V_- part of f(z_i)
};

struct LimitOptions {
    double tolerance = 1e-9;
    int max_iterations = 60;
    /// First index of the schedule t_i = 1 - 2^{-i}; raising it keeps all
    /// oracle queries inside a thin band along the boundary.
    int start_index = 0;
    /// Optional sink receiving every evaluated step.
    std::vector<LimitStep>* trace = nullptr;
};

/// Limit of f along the increasing sequence z_i = t_i (0, z_minus) + (1-t_i) z
/// with t_i = 1 - 2^{-i}. Stops when sqrt(2) (f(z_i))_0 <= tolerance, which
/// bounds the distance to the true limit by the tolerance. Throws NotConal if
/// the image sequence fails to be increasing, ToleranceNotMet on iteration
/// exhaustion.
Vec boundary_limit(const ConalOracle& f, const ChartVector& z, const Vec& z_minus,
                   const LimitOptions& options = {});

/// Largest violation of |f(z_i) - limit| <= sqrt(2) (f(z_i))_0 along a
/// recorded sequence (clamped at zero).
double sqrt2_bound_violation(const std::vector<LimitStep>& trace, const Vec& limit);

struct BoundaryPair {
    Vec source;           // boundary point in the sampled ball
    ExtendedPoint target; // value of the global boundary map
};

/// Boundary correspondences (z_minus, f^-(z_minus)) for count points spread
/// over the future boundary ball of z in rank-sufficient position.
std::vector<BoundaryPair> sample_boundary_correspondences(const ConalOracle& f,
                                                          const ChartVector& z, int count,
                                                          double tolerance,
                                                          std::uint64_t seed = 1);

/// Value of the global boundary map f^- at z_minus: pick an admissible
/// conjugator phi (identity, the causal inversion, or the causal inversion
/// after a sampled translation) and a base apex above z_minus with
/// (phi o f)(base) in the chart, run the boundary limit of phi o f, and pull
/// the limit back through phi^{-1}'s boundary action. A fixed conjugator may
/// be supplied instead of the search. Throws NoAdmissibleConjugator when
/// nothing in the candidate set works.
ExtendedPoint global_boundary_apply(const ConalOracle& f, const Vec& z_minus,
                                    double tolerance,
                                    const std::optional<CausalMatrix>& conjugator = {});

struct RecoverParams {
    /// Base point; defaults to the neutral element.
    std::optional<ChartVector> base;
    int samples = 0; // 0 = automatic (3 (n+1), at least n+4)
    double limit_tolerance = 1e-9;
    double fit_tolerance = 1e-7;
    int max_iterations = 60;
    std::uint64_t seed = 1;
    /// Re-run the recovery on a disjoint second ball and require agreement
    /// (the unique-continuation cross check).
    bool cross_validate = true;
};

struct RecoverOutcome {
    CausalMatrix matrix;
    double fit_residual = 0.0;
    int samples_used = 0;
    double sqrt2_violation = 0.0;
};

/// Recover the boundary Moebius matrix of a conal oracle from boundary
/// limits alone.
RecoverOutcome recover_mobius(const ConalOracle& f, const RecoverParams& params = {});

/// Reinterpret a boundary Moebius matrix as the causal map of H_n (the lift
/// coordinates coincide with hyperboloid coordinates) after validating the
/// causal-matrix invariants.
CausalMatrix extend_to_causal(const CausalMatrix& boundary);

struct RecoveryReport {
    CausalMatrix recovered;
    double fit_residual = 0.0;
    int boundary_samples_used = 0;
    double max_interior_deviation = 0.0;
    double max_ball_deviation = 0.0;
    double sqrt2_bound_max_violation = 0.0;
    bool verified = false;
    std::string status() const { return verified ? "verified" : "failed"; }
};

/// Compare the causal extension against the oracle: interior deviations on
/// random chart points, image-ball deviations against oracle apex images,
/// and the sqrt(2) bound along freshly recorded sequences. Failures are
/// reported, not thrown.
RecoveryReport verify_extension(const ConalOracle& f, const CausalMatrix& extension,
                                int samples, double tolerance, std::uint64_t seed = 1);

/// Spot-check order preservation on randomly generated comparable pairs;
/// throws NotConal on a violation.
void spot_check_conal(const ConalOracle& f, std::uint64_t seed = 1, int trials = 12);

/// recover + extend + verify, carrying fit metadata into the report.
RecoveryReport run_recovery_pipeline(const ConalOracle& f, const RecoverParams& params,
                                     int verify_samples, double verify_tolerance);

} // namespace conal
