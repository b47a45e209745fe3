#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "thinspectra/errors.hpp"
#include "thinspectra/limit_spectra.hpp"

using namespace thinspectra;

namespace {

constexpr double pi = std::numbers::pi;

template <class F>
double simpson(F&& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Quadrature versions of the limit products, independent of the closed forms.
LimitProducts quadrature_products(const LimitEigenvector& u, const LimitEigenvector& v, double q) {
  const Geometry& g = u.geometry;
  LimitProducts p;
  p.mass = g.measure() * simpson([&](double x) { return u.a_value(x) * v.a_value(x); }, 0.0, 1.0);
  p.energy = g.measure() * simpson([&](double x) { return u.a_slope(x) * v.a_slope(x); }, 0.0, 1.0);
  if (g.dim() == 2) {
    const Interval& iv = g.interval();
    for (auto [lo, hi] : {std::pair{iv.c, 0.0}, std::pair{0.0, iv.d}}) {
      // nudge off the origin so each side uses its own branch
      const double a = lo == 0.0 ? 1e-15 : lo, b = hi == 0.0 ? -1e-15 : hi;
      p.mass += q * simpson([&](double x) { return u.b_value({x, 0}) * v.b_value({x, 0}); }, a, b);
      p.energy += q * simpson([&](double x) { return u.b_gradient({x, 0})[0] * v.b_gradient({x, 0})[0]; }, a, b);
    }
  } else {
    const Rect& rc = g.rect();
    auto inner = [&](auto f) {
      return simpson([&](double y) { return simpson([&](double x) { return f(x, y); }, -rc.half_width, rc.half_width, 200); },
                     -rc.half_height, rc.half_height, 200);
    };
    p.mass += q * inner([&](double x, double y) { return u.b_value({x, y}) * v.b_value({x, y}); });
    p.energy += q * inner([&](double x, double y) {
      const auto gu = u.b_gradient({x, y}), gv = v.b_gradient({x, y});
      return gu[0] * gv[0] + gu[1] * gv[1];
    });
  }
  return p;
}

std::vector<double> sorted_union(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

TEST_CASE("rod with Neumann junction and Dirichlet top") {
  const Geometry g = make_geometry(2, Interval{-1, 1});
  const auto r = rod_neumann_dirichlet(g, 3);
  CHECK(r[0].value == doctest::Approx(2.467401).epsilon(1e-7));
  CHECK(r[1].value == doctest::Approx(22.2066).epsilon(1e-6));
  for (const auto& e : r) {
    const auto& v = e.vectors.front();
    CHECK(std::abs(v.a_value(1.0)) <= 1e-14);
    CHECK(std::abs(v.a_slope(0.0)) <= 1e-12);
    // the descriptor is cos(s x)
    for (double x : {0.0, 0.3, 0.77}) CHECK(v.a_value(x) == doctest::Approx(std::cos(std::sqrt(e.value) * x)));
  }
}

TEST_CASE("rod with Dirichlet at both ends") {
  const Geometry g = make_geometry(2, Interval{-1, 1});
  const auto r = rod_dirichlet_dirichlet(g, 2);
  CHECK(r[0].value == doctest::Approx(pi * pi).epsilon(1e-14));
  CHECK(r[1].value == doctest::Approx(4 * pi * pi).epsilon(1e-14));
  for (const auto& e : r) {
    const auto& v = e.vectors.front();
    CHECK(std::abs(v.a_value(0.0)) <= 1e-14);
    CHECK(std::abs(v.a_value(1.0)) <= 1e-14);
    for (double x : {0.1, 0.5}) CHECK(v.a_value(x) == doctest::Approx(std::sin(std::sqrt(e.value) * x)));
  }
}

TEST_CASE("cross-section Dirichlet spectra") {
  const auto a = cross_section_dirichlet(make_geometry(2, Interval{-pi / 2, pi / 2}), 3);
  CHECK(a[0].value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a[1].value == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(a[2].value == doctest::Approx(9.0).epsilon(1e-14));
  const auto b = cross_section_dirichlet(make_geometry(2, Interval{-1, 1}), 4);
  for (int k = 1; k <= 4; ++k) CHECK(b[k - 1].value == doctest::Approx(std::pow(k * pi / 2, 2)).epsilon(1e-14));
  const auto sq = cross_section_dirichlet(make_geometry(3, Rect{0.5, 0.5}), 4);
  CHECK(sq[0].value == doctest::Approx(2 * pi * pi).epsilon(1e-14));
  CHECK(sq[0].multiplicity == 1);
  CHECK(sq[1].value == doctest::Approx(5 * pi * pi).epsilon(1e-14));
  CHECK(sq[1].multiplicity == 2);  // (1,2) and (2,1)
  const auto split = cross_section_dirichlet(make_geometry(2, Interval{-1, 2}), 3, true);
  // (k pi)^2 from (-1,0) and (k pi / 2)^2 from (0,2): pi^2/4, pi^2 (twice), 9 pi^2/4
  CHECK(split[0].value == doctest::Approx(pi * pi / 4));
  CHECK(split[1].value == doctest::Approx(pi * pi));
  CHECK(split[1].multiplicity == 2);
  CHECK(split[2].value == doctest::Approx(9 * pi * pi / 4));
}

TEST_CASE("coupled spectrum on (-1,1), q=1") {
  const auto s = coupled_junction_spectrum(make_geometry(2, Interval{-1, 1}), 1.0, 6);
  REQUIRE(s.size() == 6);
  for (int k = 1; k <= 6; ++k) {
    CHECK(std::abs(s[k - 1].value - std::pow(k * pi / 2, 2)) <= 1e-10 * s[k - 1].value);
    CHECK(s[k - 1].multiplicity == (k % 2 ? 1 : 2));
    CHECK(static_cast<int>(s[k - 1].vectors.size()) == s[k - 1].multiplicity);
  }
}

TEST_CASE("coupled spectrum on (-1,2), q=2, against the arccos closed form") {
  const double q = 2.0, t = std::sqrt(q / (4 * q + 2 * 3.0));
  std::vector<double> want;
  for (int k = 0; k < 6; ++k) {
    if (k > 0) want.push_back(k * pi);
    for (double a : {std::acos(t), std::acos(-t)})
      for (double v : {a + 2 * k * pi, -a + 2 * k * pi})
        if (v > 0) want.push_back(v);
  }
  std::sort(want.begin(), want.end());
  const auto s = coupled_junction_spectrum(JunctionProblem{-1, 2, 3, q}, 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(std::sqrt(s[i].value) - want[i]) <= 1e-8);
    // integer multiples of pi are the double roots
    const double ratio = std::sqrt(s[i].value) / pi;
    CHECK(s[i].multiplicity == (std::abs(ratio - std::round(ratio)) < 1e-9 ? 2 : 1));
  }
}

TEST_CASE("det J is a fixed multiple of F") {
  const JunctionProblem p{-1, 1, 2, 1};
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> d(0.01, 100.0);
  double kappa = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double lam = d(rng);
    const double f = junction_function(p, lam);
    const double det = junction_matrix(p, lam).determinant();
    if (std::abs(f) < 1e-3) continue;
    const double ratio = det / f;
    if (kappa == 0.0) kappa = ratio;
    CHECK(ratio == doctest::Approx(kappa).epsilon(1e-9));
  }
  CHECK(kappa != 0.0);
  // also for an asymmetric section
  const JunctionProblem p2{-0.7, 1.9, 2.6, 3.1};
  for (double lam : {0.5, 3.3, 17.0, 61.2}) {
    CHECK(junction_matrix(p2, lam).determinant() == doctest::Approx(kappa * junction_function(p2, lam)).epsilon(1e-9));
  }
}

TEST_CASE("F vanishes at every returned root relative to its local size") {
  for (const JunctionProblem p : {JunctionProblem{-1, 1, 2, 1}, JunctionProblem{-1, 2, 3, 0.5},
                                  JunctionProblem{-0.3, 1.7, 2.0, 4.0}}) {
    for (const auto& e : coupled_junction_spectrum(p, 12)) {
      CHECK(std::abs(junction_function(p, e.value)) <= 1e-10 * junction_scale(p, e.value));
      CHECK(e.multiplicity >= 1);
      CHECK(e.multiplicity <= 2);
      CHECK(junction_nullity(junction_matrix(p, e.value)) == e.multiplicity);
    }
  }
}

TEST_CASE("no roots are missed: sign changes on a much finer scan") {
  for (const JunctionProblem p : {JunctionProblem{-1, 1, 2, 1}, JunctionProblem{-1, 2, 3, 10},
                                  JunctionProblem{-0.3, 1.7, 2.0, 0.2}}) {
    const auto roots = coupled_junction_spectrum(p, 20);
    const double smax = std::sqrt(roots.back().value);
    // simple roots are sign changes of F; count them independently
    const int fine = 20000;
    int changes = 0;
    double prev = junction_function(p, 1e-12);
    for (int i = 1; i <= fine; ++i) {
      const double s = (smax + 1e-3) * (i - 0.5) / fine;
      const double f = junction_function(p, s * s);
      if ((f > 0) != (prev > 0) && f != 0.0) ++changes;
      prev = f;
    }
    const int simple = static_cast<int>(std::count_if(roots.begin(), roots.end(), [](const auto& e) { return e.multiplicity == 1; }));
    CHECK(changes == simple);
  }
}

TEST_CASE("root finding is reported as RootLoss only on failure") {
  // an ordinary problem never throws
  CHECK_NOTHROW(coupled_junction_spectrum(JunctionProblem{-2, 1, 3, 0.7}, 15));
}

TEST_CASE("gathered examples") {
  SUBCASE("zero regime on (-1,1)") {
    const auto s = gathered_spectrum(RegimeSpec::zero(), make_geometry(2, Interval{-1, 1}), 6);
    for (int k = 1; k <= 6; ++k) {
      CHECK(s.entries[k - 1].value == doctest::Approx(std::pow(k * pi / 2, 2)).epsilon(1e-12));
      CHECK(s.entries[k - 1].multiplicity == (k % 2 ? 1 : 2));
    }
  }
  SUBCASE("infinite regime on (-1/2,1/2)") {
    const auto s = gathered_spectrum(RegimeSpec::infinite(), make_geometry(2, Interval{-0.5, 0.5}), 5);
    for (int k = 1; k <= 5; ++k) {
      CHECK(s.entries[k - 1].value == doctest::Approx(std::pow(k * pi, 2)).epsilon(1e-12));
      CHECK(s.entries[k - 1].multiplicity == 2);
    }
  }
  SUBCASE("N=3 square: merge of rod and rectangle") {
    const auto s = gathered_spectrum(RegimeSpec::finite(1.0), make_geometry(3, Rect{0.5, 0.5}), 12);
    std::vector<double> rod, rect;
    for (int k = 0; k < 40; ++k) rod.push_back(std::pow(pi / 2 + k * pi, 2));
    for (int i = 1; i < 20; ++i)
      for (int j = 1; j < 20; ++j) rect.push_back((i * i + j * j) * pi * pi);
    const auto all = sorted_union(rod, rect);
    std::size_t at = 0;
    for (const auto& e : s.entries) {
      int m = 0;
      while (at < all.size() && std::abs(all[at] - e.value) <= 1e-9 * e.value) {
        ++m;
        ++at;
      }
      CHECK(m == e.multiplicity);
    }
  }
}

TEST_CASE("zero and infinite targets on (-1,1) swap which branch carries odd k") {
  const Geometry g = make_geometry(2, Interval{-1, 1});
  const auto z = gathered_spectrum(RegimeSpec::zero(), g, 6);
  const auto i = gathered_spectrum(RegimeSpec::infinite(), g, 6);
  CHECK(z.values() == i.values());
  for (int k = 1; k <= 6; ++k) {
    const auto bz = z.entries[k - 1].branches, bi = i.entries[k - 1].branches;
    CHECK(z.entries[k - 1].multiplicity == i.entries[k - 1].multiplicity);
    if (k % 2) {
      CHECK(bz == static_cast<BranchSet>(Branch::RodND));
      CHECK(bi == static_cast<BranchSet>(Branch::Cross));
    } else {
      CHECK(bz == (Branch::CrossLeft | Branch::CrossRight));
      CHECK(bi == (Branch::RodDD | Branch::Cross));
    }
  }
}

TEST_CASE("N=3 value lists do not depend on q") {
  const Geometry g = make_geometry(3, Rect{0.5, 0.5});
  const auto a = gathered_spectrum(RegimeSpec::finite(1.0), g, 15);
  const auto b = gathered_spectrum(RegimeSpec::finite(17.3), g, 15);
  CHECK(a.values() == b.values());
}

TEST_CASE("limit products: closed forms against quadrature") {
  struct Case {
    RegimeSpec regime;
    Geometry geometry;
  };
  const std::vector<Case> cases{
      {RegimeSpec::finite(1.0), make_geometry(2, Interval{-1, 1})},
      {RegimeSpec::finite(2.5), make_geometry(2, Interval{-1, 2})},
      {RegimeSpec::zero(), make_geometry(2, Interval{-1, 2})},
      {RegimeSpec::infinite(), make_geometry(2, Interval{-0.5, 1})},
      {RegimeSpec::finite(0.5), make_geometry(3, Rect{0.5, 0.75})},
  };
  for (const auto& cs : cases) {
    const auto s = gathered_spectrum(cs.regime, cs.geometry, 5);
    const double q = cs.regime.kind == Regime::Finite ? cs.regime.q : 1.0;
    std::vector<LimitEigenvector> vs;
    for (const auto& e : s.entries)
      for (const auto& v : e.vectors) vs.push_back(v);
    for (std::size_t a = 0; a < vs.size(); ++a) {
      for (std::size_t b = 0; b < vs.size(); ++b) {
        const LimitProducts c = limit_inner_products(vs[a], vs[b], cs.regime);
        const LimitProducts n = quadrature_products(vs[a], vs[b], q);
        CHECK(c.mass == doctest::Approx(n.mass).epsilon(1e-6).scale(1.0));
        CHECK(c.energy == doctest::Approx(n.energy).epsilon(1e-6).scale(1.0));
        // orthonormal in the mass product, and energy / sqrt(lambda_a lambda_b) is the identity
        const double delta = a == b ? 1.0 : 0.0;
        CHECK(std::abs(c.mass - delta) <= 1e-12);
        CHECK(std::abs(c.energy / std::sqrt(vs[a].lambda * vs[b].lambda) - delta) <= 1e-10);
      }
      const LimitProducts self = limit_inner_products(vs[a], vs[a], cs.regime);
      CHECK(self.energy / self.mass == doctest::Approx(vs[a].lambda).epsilon(1e-10));
    }
  }
}

TEST_CASE("descriptors satisfy their space conditions") {
  const Geometry g2 = make_geometry(2, Interval{-1, 2});
  for (const RegimeSpec r : {RegimeSpec::finite(1.0), RegimeSpec::finite(0.3), RegimeSpec::zero(), RegimeSpec::infinite()}) {
    for (const auto& e : gathered_spectrum(r, g2, 8).entries)
      for (const auto& v : e.vectors) CHECK(satisfies_space_conditions(v, 1e-10));
  }
  for (const auto& e : gathered_spectrum(RegimeSpec::finite(1.0), make_geometry(3, Rect{0.5, 0.5}), 8).entries)
    for (const auto& v : e.vectors) CHECK(satisfies_space_conditions(v, 1e-12));
  // a rod-only vector breaks continuity in the coupled space
  LimitEigenvector bad = rod_neumann_dirichlet(g2, 1).front().vectors.front();
  bad.regime = Regime::Finite;
  CHECK_FALSE(satisfies_space_conditions(bad));
}

TEST_CASE("products of vectors from different regimes are refused") {
  const Geometry g = make_geometry(2, Interval{-1, 1});
  const auto z = gathered_spectrum(RegimeSpec::zero(), g, 2);
  const auto i = gathered_spectrum(RegimeSpec::infinite(), g, 2);
  bool threw = false;
  try {
    limit_inner_products(z.entries[0].vectors[0], i.entries[0].vectors[0], RegimeSpec::zero());
  } catch (const Error& e) {
    threw = e.code() == ErrorCode::RegimeMismatch;
  }
  CHECK(threw);
}

TEST_CASE("branch labels") {
  CHECK(branch_label(static_cast<BranchSet>(Branch::Coupled)) == "COUPLED");
  CHECK(branch_label(Branch::RodDD | Branch::Cross) == "ROD_DD+CROSS");
}
