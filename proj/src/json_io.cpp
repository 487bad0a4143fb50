#include "qrsm/json_io.hpp"

#include "qrsm/error.hpp"

namespace qrsm {

namespace {

RMat parse_rows(const json& rows, const std::string& field)
{
    if (!rows.is_array()) throw ConfigError(field + ": expected an array of rows");
    const auto nr = static_cast<Eigen::Index>(rows.size());
    if (nr == 0) return RMat(0, 0);
    if (!rows[0].is_array()) throw ConfigError(field + ": row 0 is not an array");
    const auto nc = static_cast<Eigen::Index>(rows[0].size());
    RMat m(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != nc)
            throw ConfigError(field + ": ragged row " + std::to_string(i));
        for (Eigen::Index j = 0; j < nc; ++j) {
            const auto& v = row[static_cast<std::size_t>(j)];
            if (!v.is_number()) throw ConfigError(field + ": non-numeric entry");
            m(i, j) = v.get<double>();
        }
    }
    return m;
}

json rows_of(const RMat& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

double number_field(const json& node, const char* key, const std::string& where)
{
    if (!node.contains(key) || !node[key].is_number()) throw ConfigError(where + ": missing numeric '" + key + "'");
    return node[key].get<double>();
}

PerturbationFn perturbation_from_json(const json& node, std::size_t idx)
{
    const std::string where = "perturbations[" + std::to_string(idx) + "]";
    if (!node.is_object() || !node.contains("kind") || !node["kind"].is_string())
        throw ConfigError(where + ": missing 'kind'");
    const auto kind = node["kind"].get<std::string>();
    if (kind == "zero") return PerturbationFn::zero();
    if (kind == "quadratic") return PerturbationFn::quadratic(number_field(node, "gamma", where));
    if (kind == "polynomial") {
        if (!node.contains("coeffs") || !node["coeffs"].is_array()) throw ConfigError(where + ": missing 'coeffs'");
        std::vector<double> coeffs;
        for (const auto& c : node["coeffs"]) {
            if (!c.is_number()) throw ConfigError(where + ": non-numeric coefficient");
            coeffs.push_back(c.get<double>());
        }
        return PerturbationFn::polynomial(std::move(coeffs));
    }
    if (kind == "sinusoid")
        return PerturbationFn::sinusoid(number_field(node, "epsilon", where), number_field(node, "omega0", where));
    throw ConfigError(where + ": unknown kind '" + kind + "'");
}

json perturbation_to_json(const PerturbationFn& f)
{
    json node{{"kind", f.kind_name()}};
    switch (f.kind()) {
    case PerturbationFn::Kind::zero: break;
    case PerturbationFn::Kind::quadratic: node["gamma"] = f.gamma(); break;
    case PerturbationFn::Kind::polynomial: node["coeffs"] = f.coeffs(); break;
    case PerturbationFn::Kind::sinusoid:
        node["epsilon"] = f.epsilon();
        node["omega0"] = f.omega0();
        break;
    }
    return node;
}

}  // namespace

RMat real_matrix_from_json(const json& node, const std::string& field)
{
    if (!node.is_object() || !node.contains("rows")) throw ConfigError(field + ": expected {\"rows\": [[...]]}");
    return parse_rows(node["rows"], field);
}

json real_matrix_to_json(const RMat& m) { return json{{"rows", rows_of(m)}}; }

CMat complex_matrix_from_json(const json& node, const std::string& field)
{
    if (!node.is_object() || !node.contains("re")) throw ConfigError(field + ": expected {\"re\": ..., \"im\": ...}");
    const RMat re = parse_rows(node["re"], field + ".re");
    RMat im = RMat::Zero(re.rows(), re.cols());
    if (node.contains("im")) {
        im = parse_rows(node["im"], field + ".im");
        if (im.rows() != re.rows() || im.cols() != re.cols())
            throw ConfigError("dimension mismatch: " + field + ".re and " + field + ".im differ in shape");
    }
    CMat m(re.rows(), re.cols());
    m.real() = re;
    m.imag() = im;
    return m;
}

json complex_matrix_to_json(const CMat& m) { return json{{"re", rows_of(m.real())}, {"im", rows_of(m.imag())}}; }

SystemSpec system_from_json(const json& doc)
{
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    for (const char* key : {"theta", "r", "m", "omega"})
        if (!doc.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");

    RMat theta = real_matrix_from_json(doc["theta"], "theta");
    RMat r = real_matrix_from_json(doc["r"], "r");
    RMat m = real_matrix_from_json(doc["m"], "m");
    CMat omega = complex_matrix_from_json(doc["omega"], "omega");

    std::vector<PerturbationFn> perturbations;
    if (doc.contains("perturbations")) {
        if (!doc["perturbations"].is_array()) throw ConfigError("perturbations: expected an array");
        std::size_t idx = 0;
        for (const auto& p : doc["perturbations"]) perturbations.push_back(perturbation_from_json(p, idx++));
    }
    RMat c(0, 0);
    if (doc.contains("c")) c = real_matrix_from_json(doc["c"], "c");
    if (c.size() == 0) c = RMat::Zero(theta.rows(), static_cast<Eigen::Index>(perturbations.size()));

    return make_system(std::move(theta), std::move(r), std::move(m), std::move(omega), std::move(c),
                       std::move(perturbations));
}

json system_to_json(const SystemSpec& spec)
{
    json doc;
    doc["theta"] = real_matrix_to_json(spec.theta);
    doc["r"] = real_matrix_to_json(spec.r_matrix);
    doc["m"] = real_matrix_to_json(spec.m_matrix);
    doc["omega"] = complex_matrix_to_json(spec.omega);
    doc["c"] = real_matrix_to_json(spec.c_matrix);
    doc["perturbations"] = json::array();
    for (const auto& f : spec.perturbations) doc["perturbations"].push_back(perturbation_to_json(f));
    return doc;
}

}  // namespace qrsm
