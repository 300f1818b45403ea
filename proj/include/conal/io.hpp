#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "conal/rigidity.hpp"

namespace conal {

inline constexpr const char* kToolVersion = "1.0.0";

/// Serialized causal map: dimension, matrix, the generator word it was built
/// from (possibly empty) and the generation seed.
struct MapDocument {
    int dim = 0;
    Mat matrix;
    GeneratorWord generator_log;
    std::uint64_t seed = 0;
    /// Present on fitted documents.
    std::optional<double> fit_residual;

    /// Validates the causal-matrix invariants.
    CausalMatrix causal_matrix() const;
};

nlohmann::json map_document_to_json(const MapDocument& doc);
MapDocument map_document_from_json(const nlohmann::json& j);

struct CorrespondencesDocument {
    int dim = 0;
    std::vector<Correspondence> pairs;
};

nlohmann::json correspondences_to_json(const CorrespondencesDocument& doc);
CorrespondencesDocument correspondences_from_json(const nlohmann::json& j);

struct ReportParams {
    int samples = 0;
    double limit_tolerance = 0.0;
    double fit_tolerance = 0.0;
    double verify_tolerance = 0.0;
    int max_iterations = 0;
    std::uint64_t seed = 0;
};

nlohmann::json report_to_json(const RecoveryReport& report, const ReportParams& params);

/// Write serialized JSON to a file atomically (temp file + rename).
void write_text_atomic(const std::string& path, const std::string& text);

std::string read_text(const std::string& path);

} // namespace conal
