#pragma once

#include <string>

#include <json.hpp>

#include "qmeter/experiments.hpp"
#include "qmeter/scheme.hpp"
#include "qmeter/turndr.hpp"

namespace qmeter::io {

using nlohmann::json;

/// A file violated one of the JSON schemas; path names the offending field.
struct SchemaError : Error {
  std::string path;
  SchemaError(std::string field_path, const std::string& message)
      : Error(field_path + ": " + message), path(std::move(field_path)) {}
};

// Matrix encoding used repo-wide:
// {"dim": n, "re": [[...]], "im": [[...]]}, row-major doubles.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& path);

// Kinded operator encodings extend the matrix encoding with
// {"kind": "density"|"observable"|"unitary"}.
json density_to_json(const DensityOperator& rho);
json observable_to_json(const Observable& obs);
json unitary_to_json(const UnitaryOperator& u);
DensityOperator density_from_json(const json& j, const std::string& path);
Observable observable_from_json(const json& j, const std::string& path);
UnitaryOperator unitary_from_json(const json& j, const std::string& path);

// Scheme file:
// {"d_S": n, "d_P": n, "U": matrix, "M": matrix, "rho_P": matrix,
//  "probe_basis": optional matrix (columns)}.
json scheme_to_json(const MeasurementScheme& scheme);
MeasurementScheme scheme_from_json(const json& j);

// {"xi": number|"unbounded", "selected_l": [k,j,m], "cv2": ...,
//  "noise_ratio": ..., "lhs": ..., "rhs": ..., "satisfied": bool}.
json tur_report_to_json(const TurReport& report);

json config_to_json(const ExperimentConfig& config);

}  // namespace qmeter::io
