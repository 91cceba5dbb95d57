#pragma once

// Internal helpers shared by the .cpp files that speak JSON. Not installed;
// public headers stay free of the JSON library.

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "qmip/qmath.hpp"

namespace qmip::jsondetail {

using nlohmann::json;

inline json complex_to_json(const cdouble& z) { return json::array({z.real(), z.imag()}); }

inline cdouble complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument(where + ": complex entries must be [re, im] number pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument(where + ": matrix must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  if (cols == 0) throw std::invalid_argument(where + ": matrix rows must be non-empty arrays");
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::invalid_argument(where + ": matrix rows have inconsistent lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = complex_from_json(row[static_cast<size_t>(c)], where);
    }
  }
  return m;
}

inline json vector_to_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

inline CVector vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument(where + ": amplitude list must be a non-empty array");
  }
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = complex_from_json(j[static_cast<size_t>(i)], where);
  }
  return v;
}

}  // namespace qmip::jsondetail
