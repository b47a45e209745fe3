// thinspectra: limit | solve | study | verify
//
// Exit codes: 0 ok, 1 acceptance failure, 2 bad arguments or configuration,
// 3 solver failure, 4 eigenvalue above the min-max bound.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>
#include <iostream>
#include <optional>

#include "thinspectra/acceptance.hpp"
#include "thinspectra/config.hpp"
#include "thinspectra/errors.hpp"
#include "thinspectra/report_io.hpp"
#include "thinspectra/study.hpp"

using namespace thinspectra;

namespace {

constexpr int kConfigExit = 2;
constexpr int kSolverExit = 3;
constexpr int kBoundExit = 4;

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::SingularMass:
    case ErrorCode::FactorizationFailure:
    case ErrorCode::NotConverged:
    case ErrorCode::TooLarge:
    case ErrorCode::RootLoss:
      return kSolverExit;
    default:
      return kConfigExit;
  }
}

struct GeometryArgs {
  int dim = 2;
  std::string omega;
};

void add_geometry(CLI::App* cmd, GeometryArgs& g) {
  cmd->add_option("--dim", g.dim, "space dimension N (2 or 3)");
  cmd->add_option("--omega", g.omega, "cross-section: c,d for N=2, half-widths wx,wy for N=3");
}

Geometry geometry_from(const GeometryArgs& g) {
  if (g.omega.empty()) throw Error(ErrorCode::ConfigError, "omega: required");
  return make_geometry(g.dim, parse_omega(g.dim, g.omega, "omega"));
}

std::ofstream open_out(const std::string& path, const char* key) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ConfigError, fmt::format("{}: cannot write '{}'", key, path));
  return f;
}

// --- limit -------------------------------------------------------------

struct LimitArgs {
  GeometryArgs geometry;
  std::string regime = "finite";
  double q = 1.0;
  int count = 6;
  std::string csv;
};

int cmd_limit(const LimitArgs& a) {
  const Geometry g = geometry_from(a.geometry);
  const RegimeSpec regime = parse_regime(a.regime, a.q, "regime");
  if (a.count < 1) throw Error(ErrorCode::ConfigError, "count: must be >= 1");
  const LimitSpectrum s = gathered_spectrum(regime, g, a.count);
  write_limit_table(std::cout, s);
  if (!a.csv.empty()) {
    auto f = open_out(a.csv, "csv");
    write_limit_csv(f, s);
  }
  return 0;
}

// --- solve -------------------------------------------------------------

struct SolveArgs {
  GeometryArgs geometry;
  double r = 0.25;
  double h = 0.25;
  int cells = 8;
  int cells_a = 0;
  int cells_b = 0;
  int grading = 0;
  int k = 4;
  bool oracle = false;
  double tol = 1e-10;
  std::string export_mesh;
  std::string export_pencil;
};

int check_bounds(const std::vector<double>& values, std::ostream& err) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (!(values[i] <= minmax_bound(k) * (1.0 + 1e-12))) {
      fmt::print(err, "BOUND_VIOLATION: lambda_{} = {} exceeds {}\n", k, num(values[i]), num(minmax_bound(k)));
      return kBoundExit;
    }
  }
  return 0;
}

int cmd_solve(const SolveArgs& a) {
  const Geometry g = geometry_from(a.geometry);
  const ThinParams p = make_thin_params(a.r, a.h);
  if (a.k < 1) throw Error(ErrorCode::ConfigError, "k: must be >= 1");
  const MeshLevels levels{a.cells, a.cells_a > 0 ? a.cells_a : a.cells, a.cells_b > 0 ? a.cells_b : a.cells};
  const Mesh mesh = make_mesh(g, levels, Grading{a.grading, 0.5});
  const Pencil pencil = assemble_pencil(mesh, p, build_constraints(mesh, p.r));
  if (!a.export_mesh.empty()) {
    auto f = open_out(a.export_mesh, "export-mesh");
    write_mesh(f, mesh);
  }
  if (!a.export_pencil.empty()) {
    auto f = open_out(a.export_pencil, "export-pencil");
    write_pencil(f, pencil);
  }

  Spectrum s;
  if (a.oracle) {
    s = dense_oracle(pencil);
    const int k = std::min(a.k, s.size());
    s.values.resize(k);
    s.residuals.resize(k);
    s.vectors = s.vectors.leftCols(k).eval();
  } else {
    SolverOptions opts;
    opts.tol = a.tol;
    s = smallest_eigenpairs(pencil, a.k, opts);
  }
  fmt::print("# {} r={} h={} order={} mesh={} solver={}\n", g.describe(), num(p.r), num(p.h), pencil.order(),
             mesh.signature(), a.oracle ? "dense" : "krylov");
  fmt::print("k,lambda,residual\n");
  for (int i = 0; i < s.size(); ++i) fmt::print("{},{},{}\n", i + 1, num(s.values[i]), num(s.residuals[i]));
  fmt::print("# orthonormality {}\n", num(mass_orthonormality_deviation(s.vectors, pencil.M)));
  return check_bounds(s.values, std::cerr);
}

// --- study -------------------------------------------------------------

struct StudyArgs {
  std::string config;
  std::string out;
  bool emit_svg = false;
};

int cmd_study(const StudyArgs& a) {
  StudyConfig cfg = load_config(a.config);
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.emit_svg) cfg.emit_svg = true;
  const StudyReport rep = run_convergence_study(cfg);

  int complete = 0;
  for (const auto& rec : rep.records) {
    if (rec.complete) {
      ++complete;
      std::vector<std::string> ls;
      for (double l : rec.lambdas) ls.push_back(num(l));
      fmt::print("n={} r={} h={} order={} lambda={}\n", rec.n, num(rec.params.r), num(rec.params.h), rec.order,
                 fmt::join(ls, " "));
    } else {
      fmt::print(std::cerr, "warning: n={} skipped: {}\n", rec.n, rec.warning);
    }
  }
  if (complete == 0) {
    fmt::print(std::cerr, "error: no schedule index could be solved\n");
    return kSolverExit;
  }
  write_study_outputs(cfg.output_dir, rep, cfg.emit_svg);
  for (const auto& r : rep.rates) {
    fmt::print("rate k={}: {} over {} points\n", r.k, num(r.rate), r.points);
  }
  for (const auto& rec : rep.records) {
    if (!rec.complete) continue;
    if (const int code = check_bounds(rec.lambdas, std::cerr)) return code;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of thin two-cylinder Laplacians and their limits"};
  app.require_subcommand(1);

  LimitArgs la;
  auto* limit = app.add_subcommand("limit", "print the limit spectrum");
  add_geometry(limit, la.geometry);
  limit->add_option("--regime", la.regime, "finite | zero | infinite");
  limit->add_option("--q", la.q, "volume ratio for the finite regime");
  limit->add_option("--count", la.count, "number of distinct values");
  limit->add_option("--csv", la.csv, "also write a CSV table");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "solve one discrete problem");
  solve->set_help_flag("--help", "print this help message and exit");  // -h would clash with --h
  add_geometry(solve, sa.geometry);
  solve->add_option("--r", sa.r, "column width");
  solve->add_option("--h", sa.h, "slab thickness");
  solve->add_option("--m", sa.cells, "cells per direction");
  solve->add_option("--m-a", sa.cells_a, "axial cells in the column (default --m)");
  solve->add_option("--m-b", sa.cells_b, "axial cells in the slab (default --m)");
  solve->add_option("--grading", sa.grading, "origin grading levels");
  solve->add_option("--k", sa.k, "number of eigenpairs");
  solve->add_option("--tol", sa.tol, "relative residual tolerance");
  solve->add_flag("--oracle", sa.oracle, "dense solve instead of the Krylov iteration");
  solve->add_option("--export-mesh", sa.export_mesh, "write the mesh listing");
  solve->add_option("--export-pencil", sa.export_pencil, "write K and M as coordinate lists");

  StudyArgs sta;
  auto* study = app.add_subcommand("study", "run a convergence study from a config file");
  study->add_option("--config", sta.config, "configuration file")->required();
  study->add_option("--out", sta.out, "output directory (overrides output.dir)");
  study->add_flag("--emit-svg", sta.emit_svg, "also write plot.svg");

  AcceptanceOptions va;
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  verify->add_option("--filter", va.filter, "comma-separated ids, names or tags");
  verify->add_flag("--inject-wrong-q", va.inject_wrong_q, "negative control for the arccos criterion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*limit) return cmd_limit(la);
    if (*solve) return cmd_solve(sa);
    if (*study) return cmd_study(sta);
    if (*verify) return acceptance_exit_code(run_acceptance(va, std::cout));
  } catch (const Error& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return exit_for(e);
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kSolverExit;
  }
  return 0;
}
