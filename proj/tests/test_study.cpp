#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "thinspectra/errors.hpp"
#include "thinspectra/study.hpp"

using namespace thinspectra;

namespace {

constexpr double pi = std::numbers::pi;

LimitSpectrum toy_limit() {
  LimitSpectrum s;
  s.entries = {{2.467, 1, 0, {}}, {9.870, 2, 0, {}}};
  return s;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::InvalidArgument;
}

StudyConfig finite_config(int count) {
  StudyConfig c;
  c.regime = RegimeSpec::finite(1.0);
  c.first = 2;
  c.count = count;
  c.K = 4;
  return c;
}

}  // namespace

TEST_CASE("in-order matching against the expanded limit list") {
  const auto m = match_spectra({2.47, 9.85, 9.92}, toy_limit(), 3);
  REQUIRE(m.size() == 3);
  CHECK(m[0].k == 1);
  CHECK(m[2].k == 3);
  CHECK(m[0].error == doctest::Approx(0.003));
  CHECK(m[1].error == doctest::Approx(0.02));
  CHECK(m[2].error == doctest::Approx(0.05));
  CHECK(m[1].entry == 1);
  CHECK(m[2].entry == 1);
  CHECK(m[2].multiplicity == 2);

  const auto same = match_spectra({2.467, 9.870, 9.870}, toy_limit(), 3);
  for (const auto& p : same) CHECK(p.error == 0.0);
}

TEST_CASE("expanded limit list for the coupled (-1,1), q=1 case") {
  const auto s = gathered_spectrum(RegimeSpec::finite(1.0), make_geometry(2, Interval{-1, 1}), 4);
  const auto e = s.expanded(4);
  REQUIRE(e.size() == 4);
  CHECK(e[0] == doctest::Approx(pi * pi / 4));
  CHECK(e[1] == doctest::Approx(pi * pi));
  CHECK(e[2] == doctest::Approx(pi * pi));
  CHECK(e[3] == doctest::Approx(9 * pi * pi / 4));
}

TEST_CASE("matching rejects unordered or short input") {
  CHECK(code_of([] { match_spectra({2.47, 9.92, 9.85}, toy_limit(), 3); }) == ErrorCode::OrderViolation);
  CHECK(code_of([] { match_spectra({2.47}, toy_limit(), 3); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("min-max bound values") {
  CHECK(minmax_bound(1) == doctest::Approx(2 * pi * pi));
  CHECK(minmax_bound(2) == doctest::Approx(16 * pi * pi));
  CHECK(minmax_bound(3) == doctest::Approx(72 * pi * pi));
}

TEST_CASE("b-part normalization per regime") {
  const ThinParams p{0.25, 1.0 / 16.0};
  CHECK(b_part_scale(Regime::Finite, 2, p) == 1.0);
  CHECK(b_part_scale(Regime::Zero, 2, p) == doctest::Approx(0.5));
  CHECK(b_part_scale(Regime::Infinite, 3, ThinParams{0.5, 0.5}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("rate fit recovers a power law") {
  const std::vector<double> x{0.5, 0.25, 0.125, 0.0625};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v * v);
  const RateFit f = fit_rate(1, x, y);
  CHECK(f.rate == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.points == 4);
}

TEST_CASE("worker count honours THINSPECTRA_THREADS") {
  const char* old = std::getenv("THINSPECTRA_THREADS");
  const std::string saved = old ? old : "";
  setenv("THINSPECTRA_THREADS", "2", 1);
  CHECK(worker_count(8) == 2);
  CHECK(worker_count(1) == 1);
  setenv("THINSPECTRA_THREADS", "64", 1);
  CHECK(worker_count(3) == 3);
  if (old) {
    setenv("THINSPECTRA_THREADS", saved.c_str(), 1);
  } else {
    unsetenv("THINSPECTRA_THREADS");
  }
}

TEST_CASE("corrector norms of the interpolated limit vector shrink with the mesh") {
  // tiny r: the tie then costs O(r sqrt(m)) and only the interpolation error is left
  const Geometry g = make_geometry(2, Interval{-1, 1});
  const ThinParams p{1e-5, 1e-5};
  const auto limit = gathered_spectrum(RegimeSpec::finite(1.0), g, 1);
  const LimitEigenvector& u = limit.entries[0].vectors[0];
  double prev_a = INFINITY, prev_b = INFINITY;
  for (int m : {8, 16, 32}) {
    const Mesh mesh = make_mesh(g, {m, m, m}, Grading{2, 0.5});
    const Pencil pencil = assemble_pencil(mesh, p, build_constraints(mesh, p.r));
    const auto free = pencil.dofs.restrict_free(interpolate_limit(mesh, u));
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(free.data(), static_cast<Eigen::Index>(free.size()));
    const CorrectorNorms c = corrector_check(mesh, pencil, x, u, 1, Regime::Finite);
    CAPTURE(m);
    CHECK(c.aH1 < prev_a);
    CHECK(c.bH1 < prev_b);
    CHECK(c.bH1 <= 2.0 * pi / m);  // O(mesh width) interpolation error
    CHECK(c.aH1 <= 2.0 * pi / m);
    CHECK(c.gb <= 1e-12 / p.h);  // constant in x_N on part B; gb carries a 1/h
    prev_a = c.aH1;
    prev_b = c.bH1;
  }
}

TEST_CASE("corrector norms are sign invariant; clusters are skipped") {
  const Geometry g = make_geometry(2, Interval{-1, 1});
  const ThinParams p{0.125, 0.125};
  const auto limit = gathered_spectrum(RegimeSpec::finite(1.0), g, 2);
  const Solved s = solve_instance(g, {16, 16, 16}, Grading{1, 0.5}, p, 3, {});
  const Eigen::VectorXd x = s.spectrum.vectors.col(0);
  const CorrectorNorms a = corrector_check(s.mesh, s.pencil, x, limit.entries[0].vectors[0], 1, Regime::Finite);
  const CorrectorNorms b = corrector_check(s.mesh, s.pencil, -x, limit.entries[0].vectors[0], 1, Regime::Finite);
  CHECK(a.aH1 == b.aH1);
  CHECK(a.bH1 == b.bH1);
  CHECK(a.ga == b.ga);
  CHECK(a.gb == b.gb);
  CHECK(a.aH1 >= 0.0);
  CHECK(code_of([&] {
          corrector_check(s.mesh, s.pencil, s.spectrum.vectors.col(1), limit.entries[1].vectors[0], 2,
                          Regime::Finite);
        }) == ErrorCode::ClusterSkipped);
  const double angle = cluster_angle(s.mesh, s.pencil, s.spectrum.vectors.middleCols(1, 2),
                                     limit.entries[1].vectors, Regime::Finite);
  CHECK(angle >= 0.0);
  CHECK(angle < pi / 4);
}

TEST_CASE("orthonormality of a single returned vector") {
  const Solved s = solve_instance(make_geometry(2, Interval{-1, 2}), {8, 8, 8}, {}, {0.25, 0.5}, 1, {});
  CHECK(orthonormality_check(s.spectrum, s.pencil) <= 1e-8);
}

TEST_CASE("finite q=1 study on (-1,1), n=2..5") {
  const StudyReport rep = run_convergence_study(finite_config(4));
  REQUIRE(rep.records.size() == 4);
  for (const auto& r : rep.records) {
    CHECK(r.complete);
    CHECK(r.orthonormality <= 1e-8);
  }
  CHECK(rep.all_bounds_ok());
  const auto e1 = rep.errors(1);
  for (std::size_t i = 1; i < e1.size(); ++i) CHECK(e1[i] < e1[i - 1]);
  // every simple k decreases over the last three n
  for (int k = 1; k <= 4; ++k) {
    if (!rep.records.back().modes[k - 1].simple) continue;
    const auto e = rep.errors(k);
    CHECK(e[3] < e[2]);
    CHECK(e[2] < e[1]);
  }
  for (int n = 0; n < 4; ++n) CHECK(rep.records[n].n == n + 2);
  CHECK(rep.rates.size() == 4);
  CHECK(rep.rates[0].rate > 0.0);
}

TEST_CASE("the discrete cluster near pi^2 collapses into the 2% window") {
  StudyConfig c = finite_config(1);
  c.first = 6;
  const StudyReport rep = run_convergence_study(c);
  const auto& lam = rep.records.front().lambdas;
  int near = 0;
  for (double l : lam) near += std::abs(l - pi * pi) <= 0.02 * pi * pi;
  CHECK(near == 2);
  int low = 0;
  for (double l : lam) low += std::abs(l - pi * pi / 4) <= 0.02 * pi * pi / 4;
  CHECK(low == 1);
}

TEST_CASE("zero regime: lambda_1 within 5% of (pi/2)^2 at the final n") {
  StudyConfig c = finite_config(4);
  c.regime = RegimeSpec::zero();
  c.K = 1;
  const StudyReport rep = run_convergence_study(c);
  const auto& last = rep.records.back();
  REQUIRE(last.complete);
  CHECK(std::abs(last.lambdas[0] - pi * pi / 4) <= 0.05 * pi * pi / 4);
  const auto e = rep.errors(1);
  CHECK(e[3] < e[2]);
  CHECK(e[2] < e[1]);
  CHECK(rep.all_bounds_ok());
}

TEST_CASE("study is deterministic and independent of the worker count") {
  const StudyConfig c = finite_config(3);
  setenv("THINSPECTRA_THREADS", "1", 1);
  const StudyReport a = run_convergence_study(c);
  setenv("THINSPECTRA_THREADS", "3", 1);
  const StudyReport b = run_convergence_study(c);
  unsetenv("THINSPECTRA_THREADS");
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].lambdas == b.records[i].lambdas);
}

TEST_CASE("a failing index marks its record incomplete and the rest continue") {
  StudyConfig c = finite_config(2);
  c.solver.max_iter = 1;
  c.solver.tol = 1e-16;
  c.solver.block_size = 1;
  const StudyReport rep = run_convergence_study(c);
  int incomplete = 0;
  for (const auto& r : rep.records) {
    if (r.complete) continue;
    ++incomplete;
    CHECK(r.warning.find("NotConverged") != std::string::npos);
  }
  CHECK(incomplete >= 1);
  CHECK(rep.records.size() == 2);
}

TEST_CASE("study configuration errors propagate") {
  StudyConfig c = finite_config(2);
  c.K = 0;
  CHECK(code_of([&] { run_convergence_study(c); }) == ErrorCode::ConfigError);
}
