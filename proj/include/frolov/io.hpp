#pragma once

// CSV and JSON serialization of lattices, reports and studies, and the
// run manifest.  Every binary64 in a CSV is printed with 17 significant
// digits; JSON numbers use the shortest string that parses back to the
// same binary64.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "frolov/cubature.hpp"
#include "frolov/dual.hpp"
#include "frolov/enumeration.hpp"
#include "frolov/errors.hpp"
#include "frolov/fooling.hpp"
#include "frolov/generator.hpp"
#include "frolov/testfns.hpp"

#ifndef FROLOV_VERSION
#define FROLOV_VERSION "0.1.0"
#endif

namespace frolov {

using json = nlohmann::ordered_json;

inline constexpr std::string_view library_version = FROLOV_VERSION;

/// "%.17g"; non-finite values print as inf, -inf, nan.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON has no infinities; they are written as the strings "inf" / "-inf".
inline json number_json(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

inline double number_from_json(json const& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    auto const s = j.get<std::string>();
    if (s == "inf") return infinity;
    if (s == "-inf") return -infinity;
    if (s == "nan") return std::nan("");
  }
  throw domain_error("expected a number, got " + j.dump());
}

/// Comma-separated rows with a mandatory header and '\n' line ends.
class csv_writer {
 public:
  csv_writer(std::ostream& out, std::vector<std::string> const& header) : out_(out), columns_(header.size()) {
    write_fields(header);
  }

  template <class... Fields>
  void row(Fields const&... fields) {
    std::vector<std::string> cells;
    (cells.push_back(cell(fields)), ...);
    write_fields(cells);
  }

  void row(std::vector<std::string> const& cells) { write_fields(cells); }

  static std::string cell(double x) { return format_number(x); }
  static std::string cell(std::string const& s) { return s; }
  static std::string cell(char const* s) { return s; }
  template <class Int>
    requires std::is_integral_v<Int>
  static std::string cell(Int v) {
    return std::to_string(v);
  }

 private:
  void write_fields(std::vector<std::string> const& cells) {
    if (cells.size() != columns_) throw domain_error("csv row has the wrong number of fields");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ostream& out_;
  std::size_t columns_;
};

// ---------------------------------------------------------------- lattices

inline json matrix_json(square_matrix<double> const& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline square_matrix<double> matrix_from_json(json const& rows) {
  if (!rows.is_array()) throw domain_error("matrix must be an array of rows");
  std::size_t const d = rows.size();
  square_matrix<double> m(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!rows[i].is_array() || rows[i].size() != d) throw domain_error("matrix must be square");
    for (std::size_t j = 0; j < d; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

/// Generator polynomial and the lattice at scale n.  Coefficients are
/// decimal strings (c_0 first) so that 64-bit integers survive any parser.
inline json lattice_json(generator_polynomial const& poly, frolov_lattice const& lat) {
  json j;
  j["dim"] = lat.dim;
  j["kind"] = std::string(to_string(lat.kind));
  j["n"] = lat.n;
  json coeffs = json::array();
  for (auto c : poly.coefficients()) coeffs.push_back(std::to_string(c));
  j["coefficients"] = coeffs;
  json roots = json::array();
  for (auto const& r : poly.roots())
    roots.push_back({{"value", r.value},
                     {"lower", r.lower},
                     {"upper", r.upper},
                     {"residual", r.residual},
                     {"residual_bound", r.residual_bound},
                     {"scaled_residual", r.scaled_residual}});
  j["roots"] = roots;
  if (lat.kind == generator_kind::chebyshev) j["root_convention"] = std::string(chebyshev_root_convention);
  j["root_separation"] = poly.root_separation();
  j["det_T_tilde"] = lat.vandermonde_det;
  j["scale"] = lat.scale;
  j["T_tilde"] = matrix_json(lat.vandermonde);
  j["T_n"] = matrix_json(lat.primal_basis);
  j["B_n"] = matrix_json(lat.dual_basis);
  return j;
}

/// Rebuilds a lattice from lattice_json output.  Extended bases are the
/// binary64 matrices widened, so this is only as exact as the JSON.
inline frolov_lattice lattice_from_json(json const& j) {
  frolov_lattice lat;
  lat.dim = j.at("dim").get<std::size_t>();
  lat.kind = parse_generator_kind(j.at("kind").get<std::string>());
  lat.n = j.at("n").get<double>();
  for (auto const& r : j.at("roots")) lat.roots.push_back(r.at("value").get<double>());
  lat.vandermonde = matrix_from_json(j.at("T_tilde"));
  lat.vandermonde_det = j.at("det_T_tilde").get<double>();
  lat.scale = j.at("scale").get<double>();
  lat.primal_basis = matrix_from_json(j.at("T_n"));
  lat.dual_basis = matrix_from_json(j.at("B_n"));
  if (lat.roots.size() != lat.dim || lat.primal_basis.dim() != lat.dim || lat.dual_basis.dim() != lat.dim ||
      lat.vandermonde.dim() != lat.dim)
    throw domain_error("lattice JSON has inconsistent dimensions");
  lat.primal_basis_extended = square_matrix<extended_real>(lat.dim);
  lat.dual_basis_extended = square_matrix<extended_real>(lat.dim);
  for (std::size_t r = 0; r < lat.dim; ++r)
    for (std::size_t c = 0; c < lat.dim; ++c) {
      lat.primal_basis_extended(r, c) = lat.primal_basis(r, c);
      lat.dual_basis_extended(r, c) = lat.dual_basis(r, c);
    }
  return lat;
}

namespace detail {
inline std::vector<std::string> points_header(std::size_t d) {
  std::vector<std::string> header;
  for (std::size_t j = 1; j <= d; ++j) header.push_back("l_" + std::to_string(j));
  for (std::size_t j = 1; j <= d; ++j) header.push_back("x_" + std::to_string(j));
  return header;
}

inline void point_row(csv_writer& csv, std::vector<std::string>& cells, std::span<std::int64_t const> l,
                      std::span<double const> x) {
  std::size_t const d = l.size();
  for (std::size_t j = 0; j < d; ++j) {
    cells[j] = std::to_string(l[j]);
    cells[d + j] = format_number(x[j]);
  }
  csv.row(cells);
}
}  // namespace detail

/// Columns l_1..l_d, x_1..x_d, lexicographic by l.
inline void write_points_csv(std::ostream& out, lattice_point_set const& pts) {
  csv_writer csv(out, detail::points_header(pts.dim()));
  std::vector<std::string> cells(2 * pts.dim());
  for (std::size_t i = 0; i < pts.count(); ++i) detail::point_row(csv, cells, pts.preimage(i), pts.point(i));
}

/// Same columns, written while enumerating (walk order, nothing stored).
inline std::uint64_t stream_points_csv(std::ostream& out, frolov_lattice const& lat,
                                       enumeration_options const& options = {}) {
  csv_writer csv(out, detail::points_header(lat.dim));
  std::vector<std::string> cells(2 * lat.dim);
  std::uint64_t count = 0;
  for_each_point(lat, options, [&](std::span<std::int64_t const> l, std::span<double const> x) {
    detail::point_row(csv, cells, l, x);
    ++count;
  });
  return count;
}

// ------------------------------------------------------------- dual report

inline json report_json(dual_spectrum_report const& r) {
  json j;
  j["dim"] = r.dim;
  j["kind"] = std::string(to_string(r.kind));
  j["n"] = r.n;
  j["norm_product_bound"] = r.norm_product_bound;
  j["min_norm_product"] = number_json(r.min_norm_product);
  j["argmin_point"] = r.argmin_point;
  j["argmin_preimage"] = r.argmin_preimage;
  j["search_radius"] = r.search_radius;
  j["m_max"] = r.m_max;
  j["c1"] = r.c1;
  j["c2"] = r.c2;
  json counts = json::array();
  for (auto const& s : r.z_counts) counts.push_back({{"m", s.m}, {"count", s.count}});
  j["z_counts"] = counts;
  j["first_occupied_level"] = r.first_occupied_level ? json(*r.first_occupied_level) : json(nullptr);
  j["fitted_c"] = r.fitted_c;
  j["max_density_ratio"] = r.max_density_ratio;
  return j;
}

// ------------------------------------------------------------ studies

inline json class_json(smoothness_class const& c) {
  return {{"s", c.s}, {"p", number_json(c.p)}, {"theta", number_json(c.theta)}, {"scale", to_string(c.scale)}};
}

inline json prediction_json(rate_prediction const& p) {
  return {{"main_rate", p.main_rate},
          {"log_exponent", p.log_exponent},
          {"loglog_exponent", p.loglog_exponent},
          {"regime", to_string(p.regime)},
          {"sharp", p.sharp}};
}

inline json fit_json(std::optional<rate_fit> const& f) {
  if (!f) return nullptr;
  return {{"main_rate", f->main_rate},
          {"log_exponent", f->log_exponent},
          {"intercept", f->intercept},
          {"r_squared", f->r_squared},
          {"main_rate_stderr", f->main_rate_stderr},
          {"log_exponent_stderr", f->log_exponent_stderr},
          {"slope_only_rate", f->slope_only_rate},
          {"records_used", f->used}};
}

/// Columns n,count,value,reference,abs_error.
inline void write_study_csv(std::ostream& out, convergence_study const& st) {
  csv_writer csv(out, {"n", "count", "value", "reference", "abs_error"});
  for (auto const& r : st.records) csv.row(r.n, r.point_count, r.value, r.reference, r.abs_error);
}

inline json study_fit_json(convergence_study const& st) {
  json j;
  j["function"] = st.function;
  j["dim"] = st.dim;
  j["kind"] = std::string(to_string(st.kind));
  j["declared_class"] = st.declared_class ? class_json(*st.declared_class) : json(nullptr);
  j["predicted"] = st.prediction ? prediction_json(*st.prediction) : json(nullptr);
  if (!st.prediction_note.empty()) j["prediction_note"] = st.prediction_note;
  j["fitted"] = fit_json(st.fit);
  j["model"] = "log(err) = intercept - main_rate*log(n) + log_exponent*log(log(n)), n >= 16";
  j["unresolved_records"] = st.unresolved;
  if (!st.fit_note.empty()) j["fit_note"] = st.fit_note;
  json res = json::array();
  for (auto const& r : st.records) res.push_back(r.error_resolution);
  j["error_resolution"] = res;
  return j;
}

/// Columns n,count,m,atoms,quadrature,integral,norm_surrogate,predicted_shape.
inline void write_fooling_csv(std::ostream& out, fooling_demo const& demo) {
  csv_writer csv(out, {"n", "count", "m", "atoms", "quadrature", "integral", "norm_surrogate", "predicted_shape"});
  for (auto const& r : demo.rows)
    csv.row(r.n, r.count, r.m, r.atoms, r.quadrature, r.integral, r.norm_surrogate, r.predicted_shape);
}

inline json fooling_fit_json(fooling_demo const& demo) {
  json j;
  j["variant"] = std::string(to_string(demo.variant));
  j["class"] = class_json(demo.cls);
  j["dim"] = demo.dim;
  j["kind"] = std::string(to_string(demo.kind));
  j["all_quadratures_zero"] = demo.all_zero;
  j["predicted"] = {{"main_rate", demo.predicted_rate}, {"log_exponent", demo.predicted_log_exponent}};
  j["fitted"] = fit_json(demo.fit);
  j["model"] = "log(integral) = intercept - main_rate*log(n) + log_exponent*log(log(n)), n >= 16";
  return j;
}

// ------------------------------------------------------------ manifest

/// Membership, ordering and formatting rules that fix the output bytes.
inline json policies_json() {
  return {{"membership", "x in [0,1)^d: 0 <= x_j < 1, exact comparisons on the binary64 image"},
          {"ordering", "lexicographic by integer preimage l (points --stream: deterministic walk order)"},
          {"dyadic_shell", "C1*floor(2^(m_j-1)) <= |z_j| < C2*2^m_j"},
          {"csv_numbers", "%.17g"},
          {"summation", "fixed chunks of " + std::to_string(summation_chunk) + " nodes combined in order"}};
}

inline json make_manifest(std::vector<std::string> const& argv, std::string const& subcommand, json const& config,
                          std::vector<std::string> const& outputs) {
  json m;
  m["tool"] = "frolov";
  m["version"] = std::string(library_version);
  m["argv"] = argv;
  m["subcommand"] = subcommand;
  m["config"] = config;
  m["policies"] = policies_json();
  m["outputs"] = outputs;
  return m;
}

/// Opens for writing in binary mode so '\n' is written as is.
inline std::ofstream open_output(std::filesystem::path const& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw domain_error("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void write_json_file(std::filesystem::path const& path, json const& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw domain_error("failed writing '" + path.string() + "'");
}

inline json read_json_file(std::filesystem::path const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw domain_error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (json::exception const& e) {
    throw domain_error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace frolov
