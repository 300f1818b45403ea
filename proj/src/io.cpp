#include "conal/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace conal {

using nlohmann::json;

namespace {

json vec_to_json(const Vec& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vec vec_from_json(const json& j) {
    if (!j.is_array()) throw InvalidArgument("expected a JSON array of numbers");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
    return v;
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r).transpose()));
    return rows;
}

Mat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw InvalidArgument("expected a JSON matrix");
    const int rows = static_cast<int>(j.size());
    Mat m;
    for (int r = 0; r < rows; ++r) {
        Vec row = vec_from_json(j[r]);
        if (r == 0) m.resize(rows, row.size());
        if (row.size() != m.cols()) throw InvalidArgument("ragged JSON matrix");
        m.row(r) = row.transpose();
    }
    return m;
}

json generator_to_json(const Generator& g) {
    if (const auto* t = std::get_if<TranslateVminus>(&g))
        return json{{"type", "translate"}, {"v", vec_to_json(t->v)}};
    if (const auto* s = std::get_if<Dilate>(&g))
        return json{{"type", "dilate"}, {"r", s->r}};
    if (const auto* r = std::get_if<Rotate>(&g))
        return json{{"type", "rotate"}, {"matrix", matrix_to_json(r->a)}};
    return json{{"type", "invert"}};
}

Generator generator_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "translate") return TranslateVminus{vec_from_json(j.at("v"))};
    if (type == "dilate") return Dilate{j.at("r").get<double>()};
    if (type == "rotate") return Rotate{matrix_from_json(j.at("matrix"))};
    if (type == "invert") return Invert{};
    throw InvalidArgument("unknown generator type '" + type + "'");
}

json extended_point_to_json(const ExtendedPoint& p) {
    if (p.is_infinity()) return json("inf");
    return vec_to_json(p.point());
}

ExtendedPoint extended_point_from_json(const json& j, int boundary_dim) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return ExtendedPoint::infinity(boundary_dim);
        throw InvalidArgument("point must be an array or the string \"inf\"");
    }
    Vec v = vec_from_json(j);
    if (static_cast<int>(v.size()) != boundary_dim)
        throw InvalidArgument("point has wrong dimension");
    return ExtendedPoint::finite(std::move(v));
}

} // namespace

CausalMatrix MapDocument::causal_matrix() const {
    if (matrix.rows() != dim + 1 || matrix.cols() != dim + 1)
        throw InvalidArgument("map document: matrix size does not match dim");
    return CausalMatrix::from_matrix(matrix);
}

json map_document_to_json(const MapDocument& doc) {
    json j{{"dim", doc.dim},
           {"matrix", matrix_to_json(doc.matrix)},
           {"seed", doc.seed}};
    json log = json::array();
    for (const auto& g : doc.generator_log) log.push_back(generator_to_json(g));
    j["generator_log"] = std::move(log);
    if (doc.fit_residual) j["fit_residual"] = *doc.fit_residual;
    return j;
}

MapDocument map_document_from_json(const json& j) {
    MapDocument doc;
    doc.dim = j.at("dim").get<int>();
    if (doc.dim < 2) throw InvalidArgument("map document: dim must be >= 2");
    doc.matrix = matrix_from_json(j.at("matrix"));
    doc.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("generator_log"))
        for (const auto& entry : j.at("generator_log"))
            doc.generator_log.push_back(generator_from_json(entry));
    if (j.contains("fit_residual")) doc.fit_residual = j.at("fit_residual").get<double>();
    return doc;
}

json correspondences_to_json(const CorrespondencesDocument& doc) {
    json pairs = json::array();
    for (const auto& p : doc.pairs)
        pairs.push_back(json{{"source", extended_point_to_json(p.source)},
                             {"target", extended_point_to_json(p.target)}});
    return json{{"dim", doc.dim}, {"pairs", std::move(pairs)}};
}

CorrespondencesDocument correspondences_from_json(const json& j) {
    CorrespondencesDocument doc;
    doc.dim = j.at("dim").get<int>();
    if (doc.dim < 2) throw InvalidArgument("correspondences: dim must be >= 2");
    for (const auto& entry : j.at("pairs"))
        doc.pairs.push_back({extended_point_from_json(entry.at("source"), doc.dim - 1),
                             extended_point_from_json(entry.at("target"), doc.dim - 1)});
    return doc;
}

json report_to_json(const RecoveryReport& report, const ReportParams& params) {
    return json{{"status", report.status()},
                {"fit_residual", report.fit_residual},
                {"max_interior_deviation", report.max_interior_deviation},
                {"max_ball_deviation", report.max_ball_deviation},
                {"sqrt2_bound_max_violation", report.sqrt2_bound_max_violation},
                {"samples", report.boundary_samples_used},
                {"recovered", matrix_to_json(report.recovered.matrix())},
                {"version", kToolVersion},
                {"params", json{{"samples", params.samples},
                                {"tol", params.limit_tolerance},
                                {"tol_fit", params.fit_tolerance},
                                {"tol_verify", params.verify_tolerance},
                                {"max_iter", params.max_iterations},
                                {"seed", params.seed}}}};
}

void write_text_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot open '" + tmp.string() + "' for writing");
        out << text;
        if (!out) throw InvalidArgument("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace conal
