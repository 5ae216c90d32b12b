#pragma once

// Command-line front end: gen, points, dual, fns, study, fool, replay.
// Exit codes: 0 success, 1 usage or domain error, 2 budget or
// certification failure.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "frolov/frolov.hpp"

namespace frolov::cli {

namespace fs = std::filesystem;

/// strtod with full consumption; accepts inf / infinity.
inline double parse_real(std::string const& s, std::string const& what) {
  errno = 0;
  char* end = nullptr;
  double const v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || std::isnan(v))
    throw domain_error(what + ": cannot parse '" + s + "' as a number");
  return v;
}

/// "study.csv" -> "study.fit.json"
inline fs::path companion_path(fs::path const& out) {
  fs::path p = out;
  p.replace_extension();
  p += ".fit.json";
  return p;
}

inline fs::path manifest_path(std::string const& out) {
  if (out.empty()) return fs::path("manifest.json");
  fs::path const dir = fs::path(out).parent_path();
  return dir.empty() ? fs::path("manifest.json") : dir / "manifest.json";
}

struct globals {
  unsigned threads = 0;
  std::uint64_t budget = default_enumeration_budget;
  std::uint64_t seed = 20240601;

  enumeration_options options() const {
    unsigned t = threads;
    if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
    return {budget, t};
  }
};

inline void require_dimension(std::size_t d) {
  if (d < 1) throw domain_error("--dim must be >= 1");
}

/// Rebuilds an argument list from a manifest config (flags in recorded order).
inline std::vector<std::string> args_from_config(json const& config, std::string const& subcommand,
                                                 std::optional<std::string> const& out_override) {
  std::vector<std::string> args;
  auto push = [&](std::string const& key, json const& v) {
    if (v.is_boolean()) {
      if (v.get<bool>()) args.push_back("--" + key);
      return;
    }
    if (v.is_null()) return;
    args.push_back("--" + key);
    args.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  };
  for (auto const& [k, v] : config.at("global").items()) push(k, v);
  args.push_back(subcommand);
  for (auto const& [k, v] : config.at("options").items()) {
    if (k == "out" && out_override) {
      push(k, *out_override);
      continue;
    }
    push(k, v);
  }
  return args;
}

inline int run(std::vector<std::string> const& argv, std::ostream& out, std::ostream& err);

namespace detail {

struct context {
  std::vector<std::string> argv;
  globals g;
  std::ostream& out;
  std::ostream& err;

  json global_config() const {
    return {{"threads", g.options().threads}, {"budget", g.budget}, {"seed", g.seed}};
  }

  void manifest(std::string const& sub, json const& options, std::string const& primary_out,
                std::vector<std::string> outputs) const {
    json config{{"global", global_config()}, {"options", options}};
    write_json_file(manifest_path(primary_out), make_manifest(argv, sub, config, outputs));
  }
};

/// Writes to the file or, when path is empty, to the context's stdout.
inline void emit(context const& cx, std::string const& path, std::function<void(std::ostream&)> const& body) {
  if (path.empty()) {
    body(cx.out);
    cx.out.flush();
    return;
  }
  auto f = open_output(path);
  body(f);
  if (!f) throw domain_error("failed writing '" + path + "'");
}

}  // namespace detail

inline int run(std::vector<std::string> const& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frolov lattice cubature: lattices, dual spectra, convergence studies and fooling functions", "frolov"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(library_version));

  globals g;
  app.add_option("--threads", g.threads, "worker threads (0 = all hardware threads)")->capture_default_str();
  app.add_option("--budget", g.budget, "maximum enumeration candidates")->capture_default_str();
  app.add_option("--seed", g.seed, "random seed (recorded in the manifest)")->capture_default_str();

  auto const kinds = std::vector<std::string>{"standard", "chebyshev"};

  // gen
  std::size_t gen_dim = 0;
  std::string gen_kind = "standard", gen_emit = "json";
  double gen_n = 1;
  auto* gen = app.add_subcommand("gen", "generator polynomial, roots and lattice matrices as JSON");
  gen->add_option("--dim", gen_dim, "dimension d")->required();
  gen->add_option("--kind", gen_kind)->check(CLI::IsMember(kinds))->capture_default_str();
  gen->add_option("--n", gen_n, "lattice scale n")->capture_default_str();
  gen->add_option("--emit", gen_emit)->check(CLI::IsMember({"json"}))->capture_default_str();

  // points
  std::size_t pts_dim = 0;
  std::string pts_kind = "standard", pts_out;
  double pts_n = 0;
  bool pts_stream = false;
  auto* points = app.add_subcommand("points", "nodes X_n in [0,1)^d as CSV");
  points->add_option("--dim", pts_dim)->required();
  points->add_option("--kind", pts_kind)->check(CLI::IsMember(kinds))->capture_default_str();
  points->add_option("--n", pts_n)->required();
  points->add_option("--out", pts_out, "CSV path (default: stdout)");
  points->add_flag("--stream", pts_stream, "write while enumerating, in walk order, without storing the set");

  // dual
  std::size_t dual_dim = 0;
  std::string dual_kind = "standard", dual_out;
  double dual_n = 0, dual_c1 = 1, dual_c2 = 1;
  std::optional<int> dual_mmax;
  std::optional<double> dual_radius;
  auto* dual = app.add_subcommand("dual", "dual spectrum report: minimal norm product and dyadic shell counts");
  dual->add_option("--dim", dual_dim)->required();
  dual->add_option("--kind", dual_kind)->check(CLI::IsMember(kinds))->capture_default_str();
  dual->add_option("--n", dual_n)->required();
  dual->add_option("--mmax", dual_mmax, "largest |m|_1 (default: ceil(log2 n) + 2)");
  dual->add_option("--radius", dual_radius, "sup-norm search radius (default: 4 n^(1/d))");
  dual->add_option("--c1", dual_c1)->capture_default_str();
  dual->add_option("--c2", dual_c2)->capture_default_str();
  dual->add_option("--out", dual_out, "JSON path (default: stdout)");

  // fns
  bool fns_list = false;
  auto* fns = app.add_subcommand("fns", "available test functions");
  fns->add_flag("--list", fns_list, "list function names");

  // study
  std::size_t st_dim = 0;
  std::string st_kind = "standard", st_fn, st_out = "study.csv";
  double st_nmin = 256, st_nmax = 1048576, st_ratio = 2;
  auto* study = app.add_subcommand("study", "convergence study of Q_n(f) over a geometric schedule");
  study->add_option("--dim", st_dim)->required();
  study->add_option("--kind", st_kind)->check(CLI::IsMember(kinds))->capture_default_str();
  study->add_option("--fn", st_fn, "hat | bump | spline:k=K | zero")->required();
  study->add_option("--nmin", st_nmin)->capture_default_str();
  study->add_option("--nmax", st_nmax)->capture_default_str();
  study->add_option("--ratio", st_ratio)->capture_default_str();
  study->add_option("--out", st_out, "CSV path; the fit goes to <stem>.fit.json")->capture_default_str();

  // fool
  std::size_t fo_dim = 0;
  std::string fo_kind = "standard", fo_p = "1", fo_theta = "inf", fo_scale = "B", fo_variant = "g1",
              fo_out = "fool.csv";
  double fo_s = 2, fo_nmin = 64, fo_nmax = 16384, fo_ratio = 2;
  auto* fool = app.add_subcommand("fool", "fooling functions vanishing on X_n and their integrals");
  fool->add_option("--dim", fo_dim)->required();
  fool->add_option("--kind", fo_kind)->check(CLI::IsMember(kinds))->capture_default_str();
  fool->add_option("--s", fo_s)->capture_default_str();
  fool->add_option("--p", fo_p, "integrability p (inf allowed)")->capture_default_str();
  fool->add_option("--theta", fo_theta, "fine index theta (inf allowed)")->capture_default_str();
  fool->add_option("--scale", fo_scale)->check(CLI::IsMember({"B", "F"}))->capture_default_str();
  fool->add_option("--variant", fo_variant)->check(CLI::IsMember({"g1", "g2", "g3", "g4"}))->capture_default_str();
  fool->add_option("--nmin", fo_nmin)->capture_default_str();
  fool->add_option("--nmax", fo_nmax)->capture_default_str();
  fool->add_option("--ratio", fo_ratio)->capture_default_str();
  fool->add_option("--out", fo_out, "CSV path; the fit goes to <stem>.fit.json")->capture_default_str();

  // replay
  std::string rp_manifest;
  std::optional<std::string> rp_out;
  auto* replay = app.add_subcommand("replay", "re-run the configuration recorded in a manifest.json");
  replay->add_option("--manifest", rp_manifest)->required();
  replay->add_option("--out", rp_out, "override the recorded output path");

  try {
    std::vector<std::string> rev(argv.rbegin(), argv.rend());
    app.parse(rev);
  } catch (CLI::ParseError const& e) {
    int const rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 1;
  }

  detail::context cx{argv, g, out, err};
  try {
    auto const options = g.options();
    if (*gen) {
      require_dimension(gen_dim);
      auto const poly = build_polynomial({gen_dim, parse_generator_kind(gen_kind), {}});
      auto const lat = assemble_lattice(poly, gen_n);
      detail::emit(cx, "", [&](std::ostream& o) { o << lattice_json(poly, lat).dump(2) << '\n'; });
      cx.manifest("gen", {{"dim", gen_dim}, {"kind", gen_kind}, {"n", gen_n}, {"emit", gen_emit}}, "", {});
    } else if (*points) {
      require_dimension(pts_dim);
      auto const lat = make_lattice({pts_dim, parse_generator_kind(pts_kind), {}}, pts_n);
      detail::emit(cx, pts_out, [&](std::ostream& o) {
        if (pts_stream) stream_points_csv(o, lat, {options.budget, 1});
        else write_points_csv(o, enumerate_points(lat, options));
      });
      json opts{{"dim", pts_dim}, {"kind", pts_kind}, {"n", pts_n}, {"stream", pts_stream}};
      if (!pts_out.empty()) opts["out"] = pts_out;
      cx.manifest("points", opts, pts_out, pts_out.empty() ? std::vector<std::string>{} : std::vector{pts_out});
    } else if (*dual) {
      require_dimension(dual_dim);
      if (!(dual_c1 > 0) || !(dual_c2 >= dual_c1) || !std::isfinite(dual_c2))
        throw domain_error("need 0 < c1 <= c2 < inf");
      auto const lat = make_lattice({dual_dim, parse_generator_kind(dual_kind), {}}, dual_n);
      int const mmax = dual_mmax.value_or(static_cast<int>(std::ceil(std::log2(dual_n))) + 2);
      double const radius = dual_radius.value_or(4 * std::pow(dual_n, 1.0 / static_cast<double>(dual_dim)));
      auto const rep = spectrum_report(lat, mmax, radius, dual_c1, dual_c2, options);
      detail::emit(cx, dual_out, [&](std::ostream& o) { o << report_json(rep).dump(2) << '\n'; });
      json opts{{"dim", dual_dim}, {"kind", dual_kind}, {"n", dual_n}, {"mmax", mmax},
                {"radius", radius}, {"c1", dual_c1}, {"c2", dual_c2}};
      if (!dual_out.empty()) opts["out"] = dual_out;
      cx.manifest("dual", opts, dual_out, dual_out.empty() ? std::vector<std::string>{} : std::vector{dual_out});
    } else if (*fns) {
      detail::emit(cx, "", [&](std::ostream& o) {
        for (auto const& name : list_functions()) {
          o << name;
          std::string const probe = name == "spline:k=K" ? "spline:k=3" : name;
          auto const f = make_function(probe, 1);
          if (f.declared_class) {
            auto const& c = *f.declared_class;
            o << "\tclass ";
            if (name == "spline:k=K") o << "(K,";
            else o << '(' << format_number(c.s) << ',';
            o << format_number(c.p) << ',' << format_number(c.theta) << ',' << to_string(c.scale) << ')';
          }
          o << "\tintegral over [0,1] " << (name == "spline:k=K" ? std::string("1/K") : format_number(f.reference_integral))
            << " per factor\n";
        }
      });
      cx.manifest("fns", {{"list", fns_list}}, "", {});
    } else if (*study) {
      require_dimension(st_dim);
      auto const f = make_function(st_fn, st_dim);
      auto const schedule = geometric_schedule(st_nmin, st_nmax, st_ratio);
      auto const st = run_study({st_dim, parse_generator_kind(st_kind), {}}, f, schedule, options);
      auto const fit_path = companion_path(st_out).string();
      detail::emit(cx, st_out, [&](std::ostream& o) { write_study_csv(o, st); });
      write_json_file(fit_path, study_fit_json(st));
      cx.manifest("study",
                  {{"dim", st_dim}, {"kind", st_kind}, {"fn", st_fn}, {"nmin", st_nmin}, {"nmax", st_nmax},
                   {"ratio", st_ratio}, {"out", st_out}},
                  st_out, {st_out, fit_path});
    } else if (*fool) {
      require_dimension(fo_dim);
      smoothness_class cls{fo_s, parse_real(fo_p, "--p"), parse_real(fo_theta, "--theta"), parse_scale(fo_scale)};
      auto const schedule = geometric_schedule(fo_nmin, fo_nmax, fo_ratio);
      auto const demo = lower_bound_demo({fo_dim, parse_generator_kind(fo_kind), {}}, cls,
                                         parse_fooling_variant(fo_variant), schedule, options);
      auto const fit_path = companion_path(fo_out).string();
      detail::emit(cx, fo_out, [&](std::ostream& o) { write_fooling_csv(o, demo); });
      write_json_file(fit_path, fooling_fit_json(demo));
      cx.manifest("fool",
                  {{"dim", fo_dim}, {"kind", fo_kind}, {"s", fo_s}, {"p", fo_p}, {"theta", fo_theta},
                   {"scale", fo_scale}, {"variant", fo_variant}, {"nmin", fo_nmin}, {"nmax", fo_nmax},
                   {"ratio", fo_ratio}, {"out", fo_out}},
                  fo_out, {fo_out, fit_path});
    } else if (*replay) {
      auto const m = read_json_file(rp_manifest);
      auto const sub = m.at("subcommand").get<std::string>();
      if (sub == "replay") throw domain_error("a replay manifest cannot be replayed");
      auto args = args_from_config(m.at("config"), sub, rp_out);
      return run(args, out, err);
    }
  } catch (budget_exceeded const& e) {
    err << "frolov: budget exceeded: " << e.what() << '\n';
    return 2;
  } catch (certification_failure const& e) {
    err << "frolov: certification failure: " << e.what() << '\n';
    return 2;
  } catch (json::exception const& e) {
    err << "frolov: malformed manifest: " << e.what() << '\n';
    return 1;
  } catch (std::exception const& e) {
    err << "frolov: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace frolov::cli
