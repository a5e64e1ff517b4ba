#include "qmeter/json_io.hpp"

#include <cmath>
#include <limits>

namespace qmeter::io {

namespace {

json real_parts(const Matrix& m, bool imaginary) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(imaginary ? m(i, j).imag() : m(i, j).real());
    rows.push_back(std::move(row));
  }
  return rows;
}

const json& require_field(const json& j, const std::string& path,
                          const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw SchemaError(path + "." + key, "missing field");
  return j.at(key);
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

void fill_part(const json& part, const std::string& path, Eigen::Index dim,
               Matrix& out, bool imaginary) {
  if (!part.is_array() || static_cast<Eigen::Index>(part.size()) != dim)
    throw SchemaError(path, "expected " + std::to_string(dim) + " rows");
  for (Eigen::Index i = 0; i < dim; ++i) {
    const json& row = part.at(static_cast<size_t>(i));
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim)
      throw SchemaError(row_path, "expected " + std::to_string(dim) + " entries");
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double v = require_number(row.at(static_cast<size_t>(k)),
                                      row_path + "[" + std::to_string(k) + "]");
      if (!std::isfinite(v))
        throw SchemaError(row_path + "[" + std::to_string(k) + "]",
                          "non-finite entry");
      if (imaginary)
        out(i, k) = Complex(out(i, k).real(), v);
      else
        out(i, k) = Complex(v, out(i, k).imag());
    }
  }
}

std::string require_kind(const json& j, const std::string& path,
                         const char* expected) {
  const json& kind = require_field(j, path, "kind");
  if (!kind.is_string() || kind.get<std::string>() != expected)
    throw SchemaError(path + ".kind",
                      std::string("expected \"") + expected + "\"");
  return kind.get<std::string>();
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  return json{{"dim", m.rows()},
              {"re", real_parts(m, false)},
              {"im", real_parts(m, true)}};
}

Matrix matrix_from_json(const json& j, const std::string& path) {
  const json& dim_field = require_field(j, path, "dim");
  if (!dim_field.is_number_integer() || dim_field.get<Eigen::Index>() < 1)
    throw SchemaError(path + ".dim", "expected a positive integer");
  const Eigen::Index dim = dim_field.get<Eigen::Index>();
  Matrix out = Matrix::Zero(dim, dim);
  fill_part(require_field(j, path, "re"), path + ".re", dim, out, false);
  fill_part(require_field(j, path, "im"), path + ".im", dim, out, true);
  return out;
}

json density_to_json(const DensityOperator& rho) {
  json j = matrix_to_json(rho.matrix());
  j["kind"] = "density";
  return j;
}

json observable_to_json(const Observable& obs) {
  json j = matrix_to_json(obs.matrix());
  j["kind"] = "observable";
  return j;
}

json unitary_to_json(const UnitaryOperator& u) {
  json j = matrix_to_json(u.matrix());
  j["kind"] = "unitary";
  return j;
}

DensityOperator density_from_json(const json& j, const std::string& path) {
  require_kind(j, path, "density");
  try {
    return DensityOperator(matrix_from_json(j, path));
  } catch (const ValidationError& e) {
    throw SchemaError(path, e.what());
  }
}

Observable observable_from_json(const json& j, const std::string& path) {
  require_kind(j, path, "observable");
  try {
    return Observable(matrix_from_json(j, path));
  } catch (const ValidationError& e) {
    throw SchemaError(path, e.what());
  }
}

UnitaryOperator unitary_from_json(const json& j, const std::string& path) {
  require_kind(j, path, "unitary");
  try {
    return UnitaryOperator(matrix_from_json(j, path));
  } catch (const ValidationError& e) {
    throw SchemaError(path, e.what());
  }
}

json scheme_to_json(const MeasurementScheme& scheme) {
  json j{{"d_S", scheme.d_s()},
         {"d_P", scheme.d_p()},
         {"U", matrix_to_json(scheme.u().matrix())},
         {"M", matrix_to_json(scheme.meter().matrix())},
         {"rho_P", matrix_to_json(scheme.rho_p().matrix())}};
  if (scheme.has_custom_probe_basis())
    j["probe_basis"] = matrix_to_json(scheme.probe_basis());
  return j;
}

MeasurementScheme scheme_from_json(const json& j) {
  const json& ds_field = require_field(j, "scheme", "d_S");
  const json& dp_field = require_field(j, "scheme", "d_P");
  if (!ds_field.is_number_integer() || ds_field.get<Eigen::Index>() < 1)
    throw SchemaError("scheme.d_S", "expected a positive integer");
  if (!dp_field.is_number_integer() || dp_field.get<Eigen::Index>() < 1)
    throw SchemaError("scheme.d_P", "expected a positive integer");
  const Eigen::Index d_s = ds_field.get<Eigen::Index>();
  const Eigen::Index d_p = dp_field.get<Eigen::Index>();

  Matrix u = matrix_from_json(require_field(j, "scheme", "U"), "scheme.U");
  Matrix m = matrix_from_json(require_field(j, "scheme", "M"), "scheme.M");
  Matrix rho_p =
      matrix_from_json(require_field(j, "scheme", "rho_P"), "scheme.rho_P");
  std::optional<Matrix> basis;
  if (j.contains("probe_basis"))
    basis = matrix_from_json(j.at("probe_basis"), "scheme.probe_basis");

  try {
    return MeasurementScheme(d_s, d_p, UnitaryOperator(std::move(u)),
                             Observable(std::move(m)),
                             DensityOperator(std::move(rho_p)),
                             std::move(basis));
  } catch (const ValidationError& e) {
    throw SchemaError("scheme", e.what());
  } catch (const DimensionError& e) {
    throw SchemaError("scheme", e.what());
  }
}

json tur_report_to_json(const TurReport& report) {
  json j;
  if (report.xi)
    j["xi"] = *report.xi;
  else
    j["xi"] = "unbounded";
  j["selected_l"] = {report.selected_l.k, report.selected_l.j,
                     report.selected_l.m};
  j["cv2"] = report.cv_squared;
  j["noise_ratio"] = report.noise_ratio;
  j["lhs"] = std::isfinite(report.lhs) ? json(report.lhs) : json("unbounded");
  j["rhs"] = report.rhs;
  j["satisfied"] = report.satisfied;
  return j;
}

json config_to_json(const ExperimentConfig& config) {
  return json{{"trials", config.trials},
              {"master_seed", config.master_seed},
              {"dim_range", config.dim_range},
              {"unbias_tol", config.unbias_tol},
              {"reg_tol", config.reg_tol},
              {"max_restarts", config.max_restarts}};
}

}  // namespace qmeter::io
