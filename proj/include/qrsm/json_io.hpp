#pragma once

#include "json.hpp"

#include "qrsm/model.hpp"
#include "qrsm/types.hpp"

namespace qrsm {

using json = nlohmann::json;

/// {"rows": [[...], ...]}; row-major. An empty row list gives a 0 x 0 matrix.
RMat real_matrix_from_json(const json& node, const std::string& field);
json real_matrix_to_json(const RMat& m);

/// {"re": [[...]], "im": [[...]]}; "im" may be omitted for a real matrix.
CMat complex_matrix_from_json(const json& node, const std::string& field);
json complex_matrix_to_json(const CMat& m);

SystemSpec system_from_json(const json& doc);
json system_to_json(const SystemSpec& spec);

}  // namespace qrsm
