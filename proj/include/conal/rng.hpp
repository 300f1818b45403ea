#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace conal {

/// Deterministic random source. All randomness in the library flows through
/// explicit seeds; distribution mapping is done by hand so that a given seed
/// produces the same stream on every standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return mag * std::cos(2.0 * M_PI * u2);
    }

    Eigen::VectorXd gaussian_vec(int k) {
        Eigen::VectorXd v(k);
        for (int i = 0; i < k; ++i) v[i] = gaussian();
        return v;
    }

    /// Uniform direction on the unit sphere of R^k (k >= 1).
    Eigen::VectorXd unit_vec(int k) {
        Eigen::VectorXd v = gaussian_vec(k);
        double n = v.norm();
        while (n < 1e-12) {
            v = gaussian_vec(k);
            n = v.norm();
        }
        return v / n;
    }

    /// Haar-distributed element of O(k) (both determinant signs occur).
    Eigen::MatrixXd haar_orthogonal(int k) {
        if (k == 1) {
            Eigen::MatrixXd a(1, 1);
            a(0, 0) = uniform() < 0.5 ? 1.0 : -1.0;
            return a;
        }
        Eigen::MatrixXd g(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) g(i, j) = gaussian();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q = qr.householderQ();
        Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int i = 0; i < k; ++i)
            if (r(i, i) < 0.0) q.col(i) = -q.col(i);
        return q;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace conal
