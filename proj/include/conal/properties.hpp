#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace conal {

struct PropertyResult {
    std::string name;
    bool passed = false;
    /// Worst observed metric for the check (residual, deviation, ...).
    double worst = 0.0;
    std::string detail;
};

struct PropertyOptions {
    int dim = 3;
    int trials = 10000;
    std::uint64_t seed = 1;
    /// Test fixture: perturbs one recovery so the suite must fail.
    bool inject_perturbation = false;
};

/// Run every module invariant as a seeded randomized check and report one
/// result per invariant. Expensive pipeline checks scale their internal
/// counts down from `trials`.
std::vector<PropertyResult> run_property_suite(const PropertyOptions& options);

bool all_passed(const std::vector<PropertyResult>& results);

} // namespace conal
