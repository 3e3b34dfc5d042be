#pragma once

// File formats: JSON for structured artifacts, CSV for flow series. Reals are
// written with 17 significant digits so that load -> save is byte-identical.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lcone/compactness.hpp"
#include "lcone/estimates.hpp"
#include "lcone/flow.hpp"

namespace lcone {

using Json = nlohmann::ordered_json;

inline std::string format_real(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x + 0.0);  // + 0.0 folds -0 into 0
  return buf;
}

namespace detail {

inline bool is_scalar_array(const Json& j) {
  for (const auto& e : j)
    if (e.is_structured()) return false;
  return true;
}

inline bool is_flat_array(const Json& j) {
  for (const auto& e : j)
    if (e.is_object() || (e.is_array() && !is_scalar_array(e))) return false;
  return true;
}

inline void emit(const Json& j, std::string& out, int indent) {
  const std::string pad(2 * (indent + 1), ' ');
  switch (j.type()) {
    case Json::value_t::null: out += "null"; return;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; return;
    case Json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); return;
    case Json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); return;
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_real(x) : "null";
      return;
    }
    case Json::value_t::string: out += Json(j).dump(); return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (is_scalar_array(j)) {
        out += '[';
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out += ", ";
          emit(j[k], out, indent);
        }
        out += ']';
        return;
      }
      // rows of short scalar arrays stay one per line
      const bool rows = is_flat_array(j);
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        out += pad;
        emit(j[k], out, rows ? indent : indent + 1);
        out += k + 1 < j.size() ? ",\n" : "\n";
      }
      out += std::string(2 * indent, ' ') + ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t k = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++k) {
        out += pad + Json(it.key()).dump() + ": ";
        emit(it.value(), out, indent + 1);
        out += k + 1 < j.size() ? ",\n" : "\n";
      }
      out += std::string(2 * indent, ' ') + '}';
      return;
    }
    default: throw Error(ErrorKind::InternalError, "unsupported JSON value");
  }
}

}  // namespace detail

/// Indented JSON with %.17g reals and a trailing newline.
inline std::string dump_json(const Json& j) {
  std::string out;
  detail::emit(j, out, 0);
  out += '\n';
  return out;
}

inline Json parse_json(const std::string& text, const std::string& origin = "<input>") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, origin + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::InvalidInput, "write failed for " + path);
}

inline Json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

namespace detail {

inline const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::ParseError, std::string("missing key \"") + key + "\"");
  return j.at(key);
}

inline double as_real(const Json& j, const std::string& what) {
  if (!j.is_number()) throw Error(ErrorKind::ParseError, what + " must be a number");
  return j.get<double>();
}

inline int as_int(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) throw Error(ErrorKind::ParseError, what + " must be an integer");
  return j.get<int>();
}

inline Json coeff_rows(const SpectralField& f) {
  Json rows = Json::array();
  for (int l = 0; l <= f.bandlimit(); ++l)
    for (int m = -l; m <= l; ++m) rows.push_back(Json::array({l, m, f(l, m)}));
  return rows;
}

inline SpectralField coeffs_from_rows(int bandlimit, const Json& rows) {
  if (bandlimit < 0) throw Error(ErrorKind::ParseError, "bandlimit must be nonnegative");
  if (!rows.is_array()) throw Error(ErrorKind::ParseError, "coefficients must be an array");
  SpectralField f(bandlimit);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    const std::string where = "coefficient row " + std::to_string(k);
    if (!r.is_array() || r.size() != 3) throw Error(ErrorKind::ParseError, where + " must be [l, m, value]");
    const int l = as_int(r[0], where + " l");
    const int m = as_int(r[1], where + " m");
    if (l < 0 || l > bandlimit || std::abs(m) > l) throw Error(ErrorKind::ParseError, where + " has index out of range");
    f(l, m) = as_real(r[2], where + " value");
  }
  return f;
}

}  // namespace detail

inline Json to_json(const SpectralField& f) {
  return Json{{"bandlimit", f.bandlimit()}, {"coeffs", detail::coeff_rows(f)}};
}

inline SpectralField spectral_from_json(const Json& j) {
  return detail::coeffs_from_rows(detail::as_int(detail::require(j, "bandlimit"), "bandlimit"), detail::require(j, "coeffs"));
}

inline Json section_to_json(const CrossSection& s, const Json& meta = Json::object()) {
  return Json{{"bandlimit", s.bandlimit()}, {"omega_coeffs", detail::coeff_rows(s.omega())}, {"meta", meta}};
}

struct LoadedSection {
  CrossSection section;
  Json meta;
};

inline LoadedSection section_from_json(const Json& j) {
  auto omega = detail::coeffs_from_rows(detail::as_int(detail::require(j, "bandlimit"), "bandlimit"), detail::require(j, "omega_coeffs"));
  Json meta = j.contains("meta") ? j.at("meta") : Json::object();
  return {CrossSection(std::move(omega)), std::move(meta)};
}

inline LoadedSection load_section(const std::string& path) {
  const auto j = read_json_file(path);
  try {
    return section_from_json(j);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ParseError) throw;
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

inline Json to_json(const FourVector& z) { return Json::array({z[0], z[1], z[2], z[3]}); }

inline FourVector four_vector_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorKind::ParseError, "four-vector must be an array of 4 numbers");
  return FourVector(detail::as_real(j[0], "z0"), detail::as_real(j[1], "z1"), detail::as_real(j[2], "z2"), detail::as_real(j[3], "z3"));
}

inline Json to_json(const LorentzMatrix& m) {
  Json out = Json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out.push_back(m.matrix()(r, c));
  return out;
}

inline LorentzMatrix lorentz_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 16) throw Error(ErrorKind::ParseError, "Lorentz matrix must be 16 numbers, row-major");
  Eigen::Matrix4d m;
  for (int k = 0; k < 16; ++k) m(k / 4, k % 4) = detail::as_real(j[k], "matrix entry");
  return LorentzMatrix::from_matrix(m);
}

inline Json to_json(const GeometryReport& r) {
  return Json{{"area", r.area},
              {"area_radius", r.area_radius},
              {"min_h2", r.min_h2},
              {"max_h2", r.max_h2},
              {"int_h2", r.int_h2},
              {"norm_a_tracefree", r.norm_a_tracefree},
              {"gap_lhs", r.gap_lhs},
              {"gap_rhs", r.gap_rhs},
              {"z_vector", to_json(r.z_vector)},
              {"kappa", r.kappa},
              {"codazzi_residual", r.codazzi_residual},
              {"w22_to_reference", r.w22_to_reference}};
}

inline Json to_json(const InequalityReport& r) {
  return Json{{"lhs", r.lhs},
              {"rhs", r.rhs},
              {"ratio", r.ratio},
              {"min_h2", r.min_h2},
              {"is_stcmc", r.is_stcmc},
              {"hypothesis_violated", r.hypothesis_violated},
              {"passed", r.passed}};
}

inline Json to_json(const OptimalityScan& s) {
  return Json{{"c", s.c},
              {"l", s.degree},
              {"m", s.order},
              {"s_values", s.s_values},
              {"f_values", s.f_values},
              {"second_derivative_fd", s.second_derivative_fd},
              {"second_derivative_formula", s.second_derivative_formula},
              {"relative_error", s.relative_error},
              {"second_derivative_expansion", s.second_derivative_expansion},
              {"relative_error_expansion", s.relative_error_expansion}};
}

inline Json to_json(const CompactnessSeries& s) {
  Json terms = Json::array();
  for (const auto& t : s.terms)
    terms.push_back(Json{{"index", t.index},
                         {"parameter", t.parameter},
                         {"w22_to_limit", t.w22_to_limit},
                         {"z_error", t.z_error},
                         {"norm_a_tracefree", t.tracefree_norm},
                         {"kappa", t.kappa},
                         {"c0_step", t.c0_step},
                         {"area_radius", t.area_radius}});
  return Json{{"mode", s.mode}, {"seed", s.seed}, {"bandlimit", s.bandlimit}, {"limit_z", to_json(s.limit_z)}, {"terms", terms}};
}

inline std::string flow_csv_header() {
  return "t,area,area_radius,Q,min_H2,max_K,norm_A_tracefree,gradient_monitor\n";
}

inline std::string flow_csv_row(const FlowState& s) {
  const auto& d = s.diagnostics;
  std::string row;
  for (double x : {s.t, d.area, d.area_radius, d.q, d.min_h2, d.max_k, d.norm_a_tracefree, d.gradient_monitor}) {
    if (!row.empty()) row += ',';
    row += format_real(x);
  }
  return row + '\n';
}

inline std::string flow_csv(const FlowRun& run) {
  std::string out = flow_csv_header();
  for (const auto& s : run.states) out += flow_csv_row(s);
  return out;
}

}  // namespace lcone
