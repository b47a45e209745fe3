#include "thinspectra/limit_spectra.hpp"

#include <fmt/format.h>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "thinspectra/errors.hpp"

namespace thinspectra {

namespace {

constexpr double kPi = std::numbers::pi;

double merge_tol(double lambda) { return 1e-9 * std::max(1.0, lambda); }

// int_0^L cos(w t) dt, with a series near w L = 0.
double cos_integral(double w, double L) {
  const double x = w * L;
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return L * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
  }
  return std::sin(x) / w;
}

// int_0^L sin(a t) sin(b t) dt and int_0^L cos(a t) cos(b t) dt
double sin_sin(double a, double b, double L) { return 0.5 * (cos_integral(a - b, L) - cos_integral(a + b, L)); }
double cos_cos(double a, double b, double L) { return 0.5 * (cos_integral(a - b, L) + cos_integral(a + b, L)); }

double q_effective(const RegimeSpec& regime) { return regime.kind == Regime::Finite ? regime.q : 1.0; }

void orthonormalize(std::vector<LimitEigenvector>& vs, const RegimeSpec& regime) {
  for (std::size_t a = 0; a < vs.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      const double c = limit_inner_products(vs[b], vs[a], regime).mass;
      vs[a].a_amp -= c * vs[b].a_amp;
      vs[a].b_minus -= c * vs[b].b_minus;
      vs[a].b_plus -= c * vs[b].b_plus;
      // product modes of distinct (i,j) are orthogonal already, so b_amp only
      // needs adjusting when the pair coincides
      if (vs[a].i == vs[b].i && vs[a].j == vs[b].j) vs[a].b_amp -= c * vs[b].b_amp;
    }
    const double n2 = limit_inner_products(vs[a], vs[a], regime).mass;
    if (!(n2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "degenerate limit eigenvector");
    vs[a].scale(1.0 / std::sqrt(n2));
  }
}

/// Sorts by value and merges coincident entries.
std::vector<LimitEigenvalue> merge_entries(std::vector<LimitEigenvalue> all, int k_max) {
  std::stable_sort(all.begin(), all.end(),
                   [](const LimitEigenvalue& a, const LimitEigenvalue& b) { return a.value < b.value; });
  std::vector<LimitEigenvalue> out;
  for (auto& e : all) {
    if (!out.empty() && std::abs(e.value - out.back().value) <= merge_tol(out.back().value)) {
      LimitEigenvalue& m = out.back();
      m.multiplicity += e.multiplicity;
      m.branches |= e.branches;
      for (auto& v : e.vectors) m.vectors.push_back(std::move(v));
      continue;
    }
    if (static_cast<int>(out.size()) == k_max) break;
    out.push_back(std::move(e));
  }
  return out;
}

void require_kmax(int k_max) {
  if (k_max < 1) throw Error(ErrorCode::InvalidArgument, fmt::format("k_max={} must be >= 1", k_max));
}

}  // namespace

std::string branch_label(BranchSet set) {
  static constexpr std::pair<Branch, const char*> names[] = {
      {Branch::RodND, "ROD_ND"},         {Branch::RodDD, "ROD_DD"},           {Branch::Cross, "CROSS"},
      {Branch::CrossLeft, "CROSS_LEFT"}, {Branch::CrossRight, "CROSS_RIGHT"}, {Branch::Coupled, "COUPLED"},
  };
  std::string out;
  for (const auto& [b, name] : names) {
    if (!has(set, b)) continue;
    if (!out.empty()) out += '+';
    out += name;
  }
  return out;
}

double LimitEigenvector::a_value(double xn) const { return a_amp * std::sin(std::sqrt(lambda) * (1.0 - xn)); }

double LimitEigenvector::a_slope(double xn) const {
  const double s = std::sqrt(lambda);
  return -a_amp * s * std::cos(s * (1.0 - xn));
}

double LimitEigenvector::b_value(std::array<double, 2> xp) const {
  if (geometry.dim() == 2) {
    const double s = std::sqrt(lambda);
    const Interval& iv = geometry.interval();
    return xp[0] < 0.0 ? b_minus * std::sin(s * (xp[0] - iv.c)) : b_plus * std::sin(s * (iv.d - xp[0]));
  }
  if (b_amp == 0.0) return 0.0;
  const Rect& rc = geometry.rect();
  const double kx = i * kPi / (2.0 * rc.half_width);
  const double ky = j * kPi / (2.0 * rc.half_height);
  return b_amp * std::sin(kx * (xp[0] + rc.half_width)) * std::sin(ky * (xp[1] + rc.half_height));
}

std::array<double, 2> LimitEigenvector::b_gradient(std::array<double, 2> xp) const {
  if (geometry.dim() == 2) {
    const double s = std::sqrt(lambda);
    const Interval& iv = geometry.interval();
    if (xp[0] < 0.0) return {b_minus * s * std::cos(s * (xp[0] - iv.c)), 0.0};
    return {-b_plus * s * std::cos(s * (iv.d - xp[0])), 0.0};
  }
  if (b_amp == 0.0) return {0.0, 0.0};
  const Rect& rc = geometry.rect();
  const double kx = i * kPi / (2.0 * rc.half_width);
  const double ky = j * kPi / (2.0 * rc.half_height);
  const double tx = kx * (xp[0] + rc.half_width);
  const double ty = ky * (xp[1] + rc.half_height);
  return {b_amp * kx * std::cos(tx) * std::sin(ty), b_amp * ky * std::sin(tx) * std::cos(ty)};
}

void LimitEigenvector::scale(double factor) {
  a_amp *= factor;
  b_minus *= factor;
  b_plus *= factor;
  b_amp *= factor;
}

std::vector<double> LimitSpectrum::expanded(int count) const {
  std::vector<double> out;
  for (const auto& e : entries) {
    for (int m = 0; m < e.multiplicity && static_cast<int>(out.size()) < count; ++m) out.push_back(e.value);
  }
  return out;
}

std::vector<double> LimitSpectrum::values() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.value);
  return out;
}

std::vector<LimitEigenvalue> rod_neumann_dirichlet(const Geometry& geometry, int k_max) {
  require_kmax(k_max);
  std::vector<LimitEigenvalue> out;
  for (int k = 0; k < k_max; ++k) {
    const double s = kPi / 2.0 + k * kPi;
    LimitEigenvector v;
    v.geometry = geometry;
    v.branch = Branch::RodND;
    v.lambda = s * s;
    v.a_amp = (k % 2 == 0) ? 1.0 : -1.0;  // cos(s x) = (-1)^k sin(s (1 - x))
    out.push_back({s * s, 1, static_cast<BranchSet>(Branch::RodND), {v}});
  }
  return out;
}

std::vector<LimitEigenvalue> rod_dirichlet_dirichlet(const Geometry& geometry, int k_max) {
  require_kmax(k_max);
  std::vector<LimitEigenvalue> out;
  for (int k = 1; k <= k_max; ++k) {
    const double s = k * kPi;
    LimitEigenvector v;
    v.geometry = geometry;
    v.branch = Branch::RodDD;
    v.lambda = s * s;
    v.a_amp = (k % 2 == 0) ? -1.0 : 1.0;  // sin(s x) = (-1)^{k+1} sin(s (1 - x))
    out.push_back({s * s, 1, static_cast<BranchSet>(Branch::RodDD), {v}});
  }
  return out;
}

std::vector<LimitEigenvalue> cross_section_dirichlet(const Geometry& geometry, int k_max, bool split) {
  require_kmax(k_max);
  std::vector<LimitEigenvalue> all;
  auto push = [&](double value, Branch branch, LimitEigenvector v) {
    v.geometry = geometry;
    v.branch = branch;
    v.lambda = value;
    all.push_back({value, 1, static_cast<BranchSet>(branch), {v}});
  };

  if (geometry.dim() == 3) {
    if (split) throw Error(ErrorCode::InvalidArgument, "split cross-sections exist only for intervals");
    const Rect& rc = geometry.rect();
    for (int i = 1; i <= k_max; ++i) {
      for (int j = 1; j <= k_max; ++j) {
        const double kx = i * kPi / (2.0 * rc.half_width);
        const double ky = j * kPi / (2.0 * rc.half_height);
        LimitEigenvector v;
        v.b_amp = 1.0;
        v.i = i;
        v.j = j;
        push(kx * kx + ky * ky, Branch::Cross, v);
      }
    }
    return merge_entries(std::move(all), k_max);
  }

  const Interval& iv = geometry.interval();
  for (int k = 1; k <= k_max; ++k) {
    if (split) {
      const double sl = k * kPi / -iv.c;
      const double sr = k * kPi / iv.d;
      LimitEigenvector left;
      left.b_minus = 1.0;
      push(sl * sl, Branch::CrossLeft, left);
      LimitEigenvector right;
      right.b_plus = 1.0;
      push(sr * sr, Branch::CrossRight, right);
    } else {
      const double s = k * kPi / (iv.d - iv.c);
      LimitEigenvector v;
      v.b_minus = 1.0;
      v.b_plus = (k % 2 == 0) ? -1.0 : 1.0;
      push(s * s, Branch::Cross, v);
    }
  }
  return merge_entries(std::move(all), k_max);
}

double junction_function(const JunctionProblem& p, double lambda, double* scale) {
  const double s = std::sqrt(lambda);
  const double t1 = p.measure * std::sin(p.c * s) * std::sin(p.d * s) * std::cos(s);
  const double t2 = -p.q * std::sin(s) * std::sin(p.d * s) * std::cos(p.c * s);
  const double t3 = p.q * std::sin(s) * std::sin(p.c * s) * std::cos(p.d * s);
  if (scale) *scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
  return t1 + t2 + t3;
}

double junction_scale(const JunctionProblem& p, double lambda) {
  const double step = kPi / (8.0 * std::max({1.0, -p.c, p.d}));
  const double s = std::sqrt(lambda);
  double scale = 0.0;
  for (double t : {std::max(0.0, s - step), s, s + step}) {
    double local = 0.0;
    junction_function(p, t * t, &local);
    scale = std::max(scale, local);
  }
  return scale;
}

double junction_function_ds(const JunctionProblem& p, double s) {
  const double c = p.c, d = p.d;
  const double sc = std::sin(c * s), cc = std::cos(c * s);
  const double sd = std::sin(d * s), cd = std::cos(d * s);
  const double ss = std::sin(s), cs = std::cos(s);
  const double d1 = p.measure * (c * cc * sd * cs + d * sc * cd * cs - sc * sd * ss);
  const double d2 = -p.q * (cs * sd * cc + d * ss * cd * cc - c * ss * sd * sc);
  const double d3 = p.q * (cs * sc * cd + c * ss * cc * cd - d * ss * sc * sd);
  return d1 + d2 + d3;
}

Eigen::Matrix3d junction_matrix(const JunctionProblem& p, double lambda) {
  const double s = std::sqrt(lambda);
  Eigen::Matrix3d j;
  // u_a(0) = u_b(0-),  u_b(0-) = u_b(0+),  flux balance / s
  j << std::sin(s), std::sin(p.c * s), 0.0,
       0.0, -std::sin(p.c * s), -std::sin(p.d * s),
       -p.measure * std::cos(s), -p.q * std::cos(p.c * s), -p.q * std::cos(p.d * s);
  return j;
}

int junction_nullity(const Eigen::Matrix3d& j) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(j);
  const auto& sv = svd.singularValues();
  const double tol = 1e-8 * sv[0];
  int n = 0;
  for (int i = 0; i < 3; ++i) n += sv[i] <= tol ? 1 : 0;
  return n;
}

namespace {

template <class G>
double bisect(G&& g, double a, double b) {
  double ga = g(a);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    if ((gm > 0.0) == (ga > 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<LimitEigenvalue> coupled_junction_spectrum(const JunctionProblem& p, int k_max) {
  require_kmax(k_max);
  if (!(p.c < 0.0 && p.d > 0.0)) throw Error(ErrorCode::NonInteriorOrigin, "coupled problem needs c < 0 < d");
  if (!(p.q > 0.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("q={} must be positive", p.q));
  if (!(p.measure > 0.0)) throw Error(ErrorCode::InvalidArgument, "measure must be positive");

  const double step = kPi / (8.0 * std::max({1.0, -p.c, p.d}));
  auto f = [&](double s) { return junction_function(p, s * s); };
  auto df = [&](double s) { return junction_function_ds(p, s); };
  auto certified = [&](double s) {
    return std::abs(junction_function(p, s * s)) <= 1e-10 * std::max(junction_scale(p, s * s), 1e-300);
  };

  std::vector<double> roots;  // in s, ascending
  auto add_root = [&](double s) {
    if (!roots.empty() && std::abs(s - roots.back()) <= 1e-9 * std::max(1.0, s)) return;
    roots.push_back(s);
  };

  // Grid offset by an irrational fraction of the step so that roots at
  // rational multiples of pi never land on a sample point.
  double s0 = 0.3819660112501051 * step;
  double f0 = f(s0), g0 = df(s0);
  const long max_cells = 50'000'000L;
  for (long cell = 0; static_cast<int>(roots.size()) < k_max; ++cell) {
    if (cell > max_cells) {
      throw Error(ErrorCode::RootLoss, fmt::format("only {} roots found below s={:.9g}", roots.size(), s0));
    }
    const double s1 = s0 + step;
    const double f1 = f(s1), g1 = df(s1);
    std::vector<double> found;
    const bool sign_change = (f0 > 0.0) != (f1 > 0.0);
    if (sign_change) {
      const double r = bisect(f, s0, s1);
      if (!certified(r)) {
        throw Error(ErrorCode::RootLoss, fmt::format("bracket [{:.15g}, {:.15g}] not certified", s0, s1));
      }
      found.push_back(r);
    }
    if ((g0 > 0.0) != (g1 > 0.0)) {
      const double cp = bisect(df, s0, s1);
      if (certified(cp)) {
        found.push_back(cp);  // tangent root
      } else if (!sign_change && (f(cp) > 0.0) != (f0 > 0.0)) {
        found.push_back(bisect(f, s0, cp));
        found.push_back(bisect(f, cp, s1));
      }
    }
    std::sort(found.begin(), found.end());
    for (double r : found) add_root(r);
    s0 = s1;
    f0 = f1;
    g0 = g1;
  }
  roots.resize(static_cast<std::size_t>(k_max));

  const RegimeSpec regime = RegimeSpec::finite(p.q);
  Geometry g = make_geometry(2, Interval{p.c, p.d});
  std::vector<LimitEigenvalue> out;
  for (double s : roots) {
    const double lambda = s * s;
    const Eigen::Matrix3d jm = junction_matrix(p, lambda);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(jm, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const int nullity = junction_nullity(jm);
    if (nullity < 1) {
      throw Error(ErrorCode::RootLoss, fmt::format("J has full rank at root s={:.15g} (sigma_min={:.3g})", s, sv[2]));
    }
    LimitEigenvalue e;
    e.value = lambda;
    e.multiplicity = nullity;
    e.branches = static_cast<BranchSet>(Branch::Coupled);
    for (int c = 3 - nullity; c < 3; ++c) {
      LimitEigenvector v;
      v.geometry = g;
      v.branch = Branch::Coupled;
      v.lambda = lambda;
      v.a_amp = svd.matrixV()(0, c);
      v.b_minus = svd.matrixV()(1, c);
      v.b_plus = svd.matrixV()(2, c);
      e.vectors.push_back(v);
    }
    orthonormalize(e.vectors, regime);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<LimitEigenvalue> coupled_junction_spectrum(const Geometry& geometry, double q, int k_max) {
  if (geometry.dim() != 2) throw Error(ErrorCode::BadDimension, "the coupled junction problem is one-dimensional");
  const Interval& iv = geometry.interval();
  return coupled_junction_spectrum(JunctionProblem{iv.c, iv.d, geometry.measure(), q}, k_max);
}

LimitSpectrum gathered_spectrum(const RegimeSpec& regime, const Geometry& geometry, int k_max) {
  require_kmax(k_max);
  if (regime.kind == Regime::Finite && !(regime.q > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("q={} must be positive", regime.q));
  }
  std::vector<LimitEigenvalue> all;
  auto append = [&](std::vector<LimitEigenvalue> part) {
    for (auto& e : part) all.push_back(std::move(e));
  };
  if (geometry.dim() == 3) {
    append(rod_neumann_dirichlet(geometry, k_max));
    append(cross_section_dirichlet(geometry, k_max));
  } else {
    switch (regime.kind) {
      case Regime::Finite: append(coupled_junction_spectrum(geometry, regime.q, k_max)); break;
      case Regime::Zero:
        append(rod_neumann_dirichlet(geometry, k_max));
        append(cross_section_dirichlet(geometry, k_max, true));
        break;
      case Regime::Infinite:
        append(rod_dirichlet_dirichlet(geometry, k_max));
        append(cross_section_dirichlet(geometry, k_max));
        break;
    }
  }
  LimitSpectrum out;
  out.regime = regime;
  out.geometry = geometry;
  out.entries = merge_entries(std::move(all), k_max);
  for (auto& e : out.entries) {
    for (auto& v : e.vectors) v.regime = regime.kind;
    orthonormalize(e.vectors, regime);
  }
  return out;
}

LimitProducts limit_inner_products(const LimitEigenvector& u, const LimitEigenvector& v, const RegimeSpec& regime) {
  if (u.regime != regime.kind || v.regime != regime.kind) {
    throw Error(ErrorCode::RegimeMismatch,
                fmt::format("vectors tagged {} and {} evaluated in the {} product", to_string(u.regime),
                            to_string(v.regime), to_string(regime.kind)));
  }
  if (u.geometry.dim() != v.geometry.dim()) throw Error(ErrorCode::RegimeMismatch, "vectors of different dimension");
  const double su = std::sqrt(u.lambda);
  const double sv = std::sqrt(v.lambda);
  const double qe = q_effective(regime);
  const Geometry& g = u.geometry;

  LimitProducts out;
  const double aa = u.a_amp * v.a_amp;
  out.mass += g.measure() * aa * sin_sin(su, sv, 1.0);
  out.energy += g.measure() * aa * su * sv * cos_cos(su, sv, 1.0);

  if (g.dim() == 2) {
    const Interval& iv = g.interval();
    const double lm = u.b_minus * v.b_minus;
    const double lp = u.b_plus * v.b_plus;
    out.mass += qe * (lm * sin_sin(su, sv, -iv.c) + lp * sin_sin(su, sv, iv.d));
    out.energy += qe * su * sv * (lm * cos_cos(su, sv, -iv.c) + lp * cos_cos(su, sv, iv.d));
  } else if (u.b_amp != 0.0 && v.b_amp != 0.0) {
    const Rect& rc = g.rect();
    const double lx = 2.0 * rc.half_width;
    const double ly = 2.0 * rc.half_height;
    const double kx1 = u.i * kPi / lx, kx2 = v.i * kPi / lx;
    const double ky1 = u.j * kPi / ly, ky2 = v.j * kPi / ly;
    const double bb = u.b_amp * v.b_amp;
    const double sx = sin_sin(kx1, kx2, lx), sy = sin_sin(ky1, ky2, ly);
    const double cx = cos_cos(kx1, kx2, lx), cy = cos_cos(ky1, ky2, ly);
    out.mass += qe * bb * sx * sy;
    out.energy += qe * bb * (kx1 * kx2 * cx * sy + ky1 * ky2 * sx * cy);
  }
  return out;
}

bool satisfies_space_conditions(const LimitEigenvector& u, double tol) {
  const double scale = std::max({std::abs(u.a_amp), std::abs(u.b_minus), std::abs(u.b_plus), std::abs(u.b_amp), 1.0});
  const double t = tol * scale;
  if (std::abs(u.a_value(1.0)) > t) return false;
  const Geometry& g = u.geometry;
  if (g.dim() == 3) {
    const Rect& rc = g.rect();
    for (double y : {-rc.half_height, 0.0, 0.3 * rc.half_height}) {
      if (std::abs(u.b_value({-rc.half_width, y})) > t || std::abs(u.b_value({rc.half_width, y})) > t) return false;
    }
    for (double x : {-rc.half_width, 0.0, 0.3 * rc.half_width}) {
      if (std::abs(u.b_value({x, -rc.half_height})) > t || std::abs(u.b_value({x, rc.half_height})) > t) return false;
    }
    return true;
  }
  const Interval& iv = g.interval();
  if (std::abs(u.b_value({iv.c, 0.0})) > t || std::abs(u.b_value({iv.d, 0.0})) > t) return false;
  const double s = std::sqrt(u.lambda);
  const double left = u.b_minus * std::sin(-s * iv.c);  // u_b(0-)
  const double right = u.b_value({0.0, 0.0});           // u_b(0+)
  const double a0 = u.a_value(0.0);
  switch (u.regime) {
    case Regime::Finite: return std::abs(a0 - left) <= t && std::abs(left - right) <= t;
    case Regime::Zero: return std::abs(left) <= t && std::abs(right) <= t;
    case Regime::Infinite: return std::abs(a0) <= t && std::abs(left - right) <= t;
  }
  return false;
}

}  // namespace thinspectra
