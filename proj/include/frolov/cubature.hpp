#pragma once

// The equal-weight rule Q_n(f) = (1/n) sum f(x) over X_n in [0,1)^d, and
// convergence studies that fit log|error| = a - rate log n + beta log log n.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "frolov/eft.hpp"
#include "frolov/enumeration.hpp"
#include "frolov/errors.hpp"
#include "frolov/generator.hpp"
#include "frolov/testfns.hpp"

namespace frolov {

struct cubature_result {
  double n = 0;
  std::uint64_t point_count = 0;
  /// sum of f over the nodes, before the 1/n weight
  double raw_sum = 0;
  double value = 0;
  double reference = 0;
  /// |Q_n(f) - reference| formed before either side is rounded to binary64
  double abs_error = 0;
  /// A priori bound on the rounding in value plus the reference error; an
  /// abs_error at or below it is not a resolved measurement.
  double error_resolution = 0;
};

/// Nodes per summation chunk.  Chunk sums are combined in chunk order, so
/// the result does not depend on the thread count.
inline constexpr std::size_t summation_chunk = 4096;

/// Q_n(f) over a stored node set.  When f has an extended evaluator the
/// nodes are recomputed from their preimages in extended precision and the
/// sum is carried in extended precision; otherwise binary64 values are
/// summed with Neumaier compensation.
inline cubature_result integrate(lattice_point_set const& nodes, test_function const& f, unsigned threads = 1) {
  if (f.arity != nodes.dim())
    throw domain_error("function '" + f.name + "' has arity " + std::to_string(f.arity) + " but the lattice has d=" +
                       std::to_string(nodes.dim()));
  std::size_t const d = nodes.dim();
  std::size_t const count = nodes.count();
  std::size_t const chunks = (count + summation_chunk - 1) / summation_chunk;
  bool const extended = static_cast<bool>(f.evaluate_extended);
  std::vector<extended_real> partial(chunks, 0);
  std::vector<double> magnitude(chunks, 0);
  auto run = [&](std::size_t first, std::size_t stride) {
    std::vector<extended_real> x(d);
    for (std::size_t c = first; c < chunks; c += stride) {
      std::size_t const end = std::min(count, (c + 1) * summation_chunk);
      double mag = 0;
      if (extended) {
        extended_real acc = 0;
        for (std::size_t i = c * summation_chunk; i < end; ++i) {
          primal_image_extended(nodes.lattice(), nodes.preimage(i), x);
          extended_real const v = f.evaluate_extended(x);
          acc += v;
          mag += std::fabs(static_cast<double>(v));
        }
        partial[c] = acc;
      } else {
        compensated_sum acc;
        for (std::size_t i = c * summation_chunk; i < end; ++i) {
          double const v = f(nodes.point(i));
          acc += v;
          mag += std::fabs(v);
        }
        partial[c] = static_cast<extended_real>(acc.head()) + static_cast<extended_real>(acc.tail());
      }
      magnitude[c] = mag;
    }
  };
  std::size_t const workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(chunks, 1));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
  }
  extended_real total = 0;
  for (auto const& p : partial) total += p;
  double abs_total = 0;
  for (double m : magnitude) abs_total += m;

  cubature_result r;
  r.n = nodes.lattice().n;
  r.point_count = count;
  r.raw_sum = static_cast<double>(total);
  extended_real const q = total / static_cast<extended_real>(r.n);
  r.value = static_cast<double>(q);
  r.reference = f.reference_integral;
  // a hand-built function may set only the binary64 reference
  extended_real const ref = static_cast<double>(f.reference_extended) == f.reference_integral
                                ? f.reference_extended
                                : static_cast<extended_real>(f.reference_integral);
  extended_real const diff = q - ref;
  r.abs_error = static_cast<double>(diff < 0 ? -diff : diff);
  // Each term carries O(d) roundings from the node and the evaluation; the
  // extended sum adds at most one per term in its chunk plus one per chunk.
  // The compensated binary64 sum is dominated by the evaluations.
  double const u = extended ? extended_unit_roundoff : unit_roundoff;
  double const per_term = extended ? static_cast<double>(summation_chunk + chunks) + 16.0 * d : 16.0 * d;
  double const ref_err = f.reference_extended == ref ? f.reference_extended_error : f.reference_error;
  r.error_resolution = 2 * per_term * u * abs_total / r.n + ref_err;
  return r;
}

inline cubature_result integrate(frolov_lattice const& lat, test_function const& f,
                                 enumeration_options const& options = {}) {
  if (f.arity != lat.dim)
    throw domain_error("function '" + f.name + "' has arity " + std::to_string(f.arity) + " but the lattice has d=" +
                       std::to_string(lat.dim));
  return integrate(enumerate_points(lat, options), f, options.threads);
}

/// nmin, nmin*ratio, ... up to nmax (inclusive up to rounding).
inline std::vector<double> geometric_schedule(double nmin, double nmax, double ratio) {
  if (!(nmin >= 1) || !(nmax >= nmin) || !std::isfinite(nmax)) throw domain_error("schedule needs 1 <= nmin <= nmax");
  if (!(ratio > 1) || !std::isfinite(ratio)) throw domain_error("schedule ratio must be > 1");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    double const n = nmin * std::pow(ratio, k);
    if (n > nmax * (1 + 1e-12)) break;
    out.push_back(n);
  }
  return out;
}

/// Least-squares fit of log(err) = intercept - main_rate log n + log_exponent log log n.
struct rate_fit {
  double main_rate = 0;
  double log_exponent = 0;
  double intercept = 0;
  double r_squared = 0;
  /// OLS standard errors (0 when the fit is exact or has no residual degrees of freedom)
  double main_rate_stderr = 0;
  double log_exponent_stderr = 0;
  /// Slope of log err against -log n alone.  Aliases the log factor into
  /// the rate; reported as a diagnostic only.
  double slope_only_rate = 0;
  std::size_t used = 0;
};

/// Records below this n are left out of fits (log log n must be well away from 0).
inline constexpr double fit_min_n = 16;
inline constexpr std::size_t fit_min_records = 4;

/// Returns nothing when fewer than fit_min_records pairs have n >= 16 and err > 0.
inline std::optional<rate_fit> fit_rate(std::span<double const> n, std::span<double const> err) {
  if (n.size() != err.size()) throw domain_error("fit_rate: n and error lists differ in length");
  std::vector<std::size_t> use;
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n[i] >= fit_min_n && err[i] > 0 && std::isfinite(err[i])) use.push_back(i);
  if (use.size() < fit_min_records) return std::nullopt;

  Eigen::MatrixXd a(static_cast<Eigen::Index>(use.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(use.size()));
  for (std::size_t r = 0; r < use.size(); ++r) {
    double const ln = std::log(n[use[r]]);
    auto const row = static_cast<Eigen::Index>(r);
    a(row, 0) = 1;
    a(row, 1) = -ln;
    a(row, 2) = std::log(ln);
    y(row) = std::log(err[use[r]]);
  }
  Eigen::Vector3d const c = a.colPivHouseholderQr().solve(y);
  Eigen::VectorXd const resid = y - a * c;
  double const mean = y.mean();
  double const ss_tot = (y.array() - mean).square().sum();
  double const ss_res = resid.squaredNorm();

  rate_fit f;
  f.intercept = c(0);
  f.main_rate = c(1);
  f.log_exponent = c(2);
  f.r_squared = ss_tot > 0 ? 1 - ss_res / ss_tot : 1;
  f.used = use.size();
  auto const rows = a.rows();
  if (rows > 3) {
    Eigen::Matrix3d const cov = (a.transpose() * a).inverse() * (ss_res / static_cast<double>(rows - 3));
    f.main_rate_stderr = std::sqrt(std::max(0.0, cov(1, 1)));
    f.log_exponent_stderr = std::sqrt(std::max(0.0, cov(2, 2)));
  }
  Eigen::MatrixXd const a2 = a.leftCols(2);
  Eigen::Vector2d const c2 = a2.colPivHouseholderQr().solve(y);
  f.slope_only_rate = c2(1);
  return f;
}

struct convergence_study {
  std::string function;
  std::size_t dim = 0;
  generator_kind kind = generator_kind::standard;
  std::optional<smoothness_class> declared_class;
  std::optional<rate_prediction> prediction;
  /// Set when the class lies outside every covered regime.
  std::string prediction_note;
  std::vector<cubature_result> records;
  std::optional<rate_fit> fit;
  /// records with abs_error == 0 or abs_error <= error_resolution; kept but not fitted
  std::size_t unresolved = 0;
  std::string fit_note;
};

/// Fills fit, unresolved and fit_note from the records.
inline void fit_study(convergence_study& st) {
  std::vector<double> ns, errs;
  st.unresolved = 0;
  for (auto const& r : st.records) {
    if (r.abs_error == 0 || r.abs_error <= r.error_resolution) {
      ++st.unresolved;
      continue;
    }
    ns.push_back(r.n);
    errs.push_back(r.abs_error);
  }
  st.fit = fit_rate(ns, errs);
  st.fit_note.clear();
  if (st.unresolved > 0)
    st.fit_note = std::to_string(st.unresolved) + " record(s) with zero or unresolved error excluded from the fit";
  if (!st.fit) {
    if (!st.fit_note.empty()) st.fit_note += "; ";
    st.fit_note += "fit skipped: fewer than 4 records with n >= 16 and resolved error";
  }
}

inline void check_schedule(std::span<double const> schedule) {
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] >= 1)) throw domain_error("schedule entries must be >= 1");
    if (i > 0 && !(schedule[i] >= 2 * schedule[i - 1] * (1 - 1e-12)))
      throw domain_error("schedule must be geometric with ratio >= 2");
  }
}

inline convergence_study run_study(generator_spec const& spec, test_function const& f,
                                   std::span<double const> schedule, enumeration_options const& options = {}) {
  spec.validate();
  if (f.arity != spec.dimension)
    throw domain_error("function '" + f.name + "' has arity " + std::to_string(f.arity) + " but d=" +
                       std::to_string(spec.dimension));
  check_schedule(schedule);

  convergence_study st;
  st.function = f.name;
  st.dim = spec.dimension;
  st.kind = spec.kind;
  st.declared_class = f.declared_class;
  if (f.declared_class) {
    try {
      st.prediction = predict_rate(*f.declared_class, spec.dimension);
    } catch (unsupported_class const& e) {
      st.prediction_note = e.what();
    }
  }

  auto const poly = build_polynomial(spec);
  for (double n : schedule) st.records.push_back(integrate(assemble_lattice(poly, n), f, options));

  fit_study(st);
  return st;
}

struct generator_comparison {
  convergence_study standard;
  convergence_study chebyshev;
  /// standard error / chebyshev error per n (infinite or NaN where an error is 0)
  std::vector<double> error_ratio;
};

inline generator_comparison compare_generators(test_function const& f, std::span<double const> schedule,
                                               enumeration_options const& options = {}) {
  if (!std::has_single_bit(f.arity))
    throw domain_error("comparing generators needs d a power of two, got d=" + std::to_string(f.arity));
  generator_comparison c;
  c.standard = run_study({f.arity, generator_kind::standard, {}}, f, schedule, options);
  c.chebyshev = run_study({f.arity, generator_kind::chebyshev, {}}, f, schedule, options);
  for (std::size_t i = 0; i < c.standard.records.size(); ++i)
    c.error_ratio.push_back(c.standard.records[i].abs_error / c.chebyshev.records[i].abs_error);
  return c;
}

}  // namespace frolov
