#include "thinspectra/study.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "thinspectra/errors.hpp"

namespace thinspectra {

MeshLevels MeshPolicy::levels_for(int n) const {
  const int e = std::clamp(n + exponent_offset, 0, 20);
  int m = std::max(min_cells, 1 << e);
  if (max_cells > 0) m = std::min(m, max_cells);
  return {m, m, m};
}

Grading MeshPolicy::grading_for(const Geometry& geometry, const MeshLevels& levels, double r) const {
  if (!grade_to_r || !(grading_ratio < 1.0)) return {0, grading_ratio};
  double base = 0.0;
  for (int ax = 0; ax + 1 < geometry.dim(); ++ax) {
    const auto x = cross_section_axis(geometry.lower(ax), geometry.upper(ax), levels.m_omega, {});
    const auto it = std::lower_bound(x.begin(), x.end(), 0.0);
    const auto i = static_cast<std::size_t>(it - x.begin());
    base = std::max({base, x[i] - x[i - 1], x[i + 1] - x[i]});
  }
  return {grading_levels_for(base, r, grading_ratio), grading_ratio};
}

std::vector<MatchedPair> match_spectra(const std::vector<double>& discrete, const LimitSpectrum& limit, int K) {
  for (std::size_t i = 1; i < discrete.size(); ++i) {
    if (discrete[i] < discrete[i - 1]) {
      throw Error(ErrorCode::OrderViolation,
                  fmt::format("discrete value {} ({:.9g}) below its predecessor ({:.9g})", i + 1, discrete[i],
                              discrete[i - 1]));
    }
  }
  if (K < 1 || static_cast<int>(discrete.size()) < K) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("need {} discrete values, have {}", K, discrete.size()));
  }
  std::vector<MatchedPair> out;
  for (std::size_t e = 0; e < limit.entries.size() && static_cast<int>(out.size()) < K; ++e) {
    const LimitEigenvalue& le = limit.entries[e];
    for (int m = 0; m < le.multiplicity && static_cast<int>(out.size()) < K; ++m) {
      MatchedPair p;
      p.k = static_cast<int>(out.size()) + 1;
      p.limit = le.value;
      p.discrete = discrete[out.size()];
      p.error = std::abs(p.discrete - p.limit);
      p.entry = static_cast<int>(e);
      p.multiplicity = le.multiplicity;
      out.push_back(p);
    }
  }
  if (static_cast<int>(out.size()) < K) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("limit spectrum holds fewer than {} values", K));
  }
  return out;
}

double minmax_bound(int k) { return std::ldexp(1.0, k) * k * k * std::numbers::pi * std::numbers::pi; }

double b_part_scale(Regime regime, int dim, const ThinParams& params) {
  return regime == Regime::Finite ? 1.0 : std::sqrt(volume_ratio(dim, params));
}

std::vector<double> interpolate_limit(const Mesh& mesh, const LimitEigenvector& u) {
  std::vector<double> out(static_cast<std::size_t>(mesh.node_count()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Node& n = mesh.nodes()[i];
    out[i] = n.part == Part::A ? u.a_value(n.xn) : u.b_value(n.xp);
  }
  return out;
}

namespace {

/// Node values of a free vector with the part-B values scaled.
std::vector<double> scaled_nodes(const Mesh& mesh, const Pencil& pencil, const Eigen::VectorXd& x, double bscale) {
  std::vector<double> full = pencil.dofs.expand({x.data(), static_cast<std::size_t>(x.size())});
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (mesh.nodes()[i].part == Part::B) full[i] *= bscale;
  }
  return full;
}

struct PartMasses {
  SparseSymmetric a;
  SparseSymmetric b;

  explicit PartMasses(const Mesh& mesh) : a(assemble_part_mass(mesh, Part::A)), b(assemble_part_mass(mesh, Part::B)) {}

  double product(const std::vector<double>& u, const std::vector<double>& v) const {
    return a.bilinear(u, v) + b.bilinear(u, v);
  }
};

}  // namespace

CorrectorNorms corrector_check(const Mesh& mesh, const Pencil& pencil, const Eigen::VectorXd& x,
                               const LimitEigenvector& limit, int limit_multiplicity, Regime regime) {
  if (limit_multiplicity > 1) {
    throw Error(ErrorCode::ClusterSkipped,
                fmt::format("limit value {:.9g} has multiplicity {}", limit.lambda, limit_multiplicity));
  }
  const int dim = mesh.dim();
  const ThinParams& p = pencil.params;
  std::vector<double> u = scaled_nodes(mesh, pencil, x, b_part_scale(regime, dim, p));

  const PartMasses masses(mesh);
  if (masses.product(u, interpolate_limit(mesh, limit)) < 0.0) {
    for (double& v : u) v = -v;
  }

  // 3-point Gauss per direction on every cell.
  static constexpr double gp[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
  static constexpr double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const int corners = 1 << dim;
  const int nq = dim == 2 ? 9 : 27;
  double a2 = 0.0, b2 = 0.0, ga2 = 0.0, gb2 = 0.0;
  for (const Element& e : mesh.elements()) {
    std::array<double, 3> size{};
    double volume = 1.0;
    for (int d = 0; d < dim; ++d) {
      size[d] = e.hi[d] - e.lo[d];
      volume *= size[d];
    }
    for (int q = 0; q < nq; ++q) {
      std::array<int, 3> qi{q % 3, (q / 3) % 3, q / 9};
      std::array<double, 3> xi{};
      double w = volume;
      for (int d = 0; d < dim; ++d) {
        xi[d] = gp[qi[d]];
        w *= gw[qi[d]];
      }
      double val = 0.0;
      std::array<double, 3> grad{};
      for (int c = 0; c < corners; ++c) {
        std::array<double, 3> f{};
        for (int d = 0; d < dim; ++d) f[d] = ((c >> d) & 1) ? xi[d] : 1.0 - xi[d];
        double phi = 1.0;
        for (int d = 0; d < dim; ++d) phi *= f[d];
        const double uc = u[e.nodes[c]];
        val += phi * uc;
        for (int d = 0; d < dim; ++d) {
          double g = (((c >> d) & 1) ? 1.0 : -1.0) / size[d];
          for (int o = 0; o < dim; ++o) {
            if (o != d) g *= f[o];
          }
          grad[d] += g * uc;
        }
      }
      std::array<double, 2> xp{};
      for (int d = 0; d + 1 < dim; ++d) xp[d] = e.lo[d] + xi[d] * size[d];
      const double xn = e.lo[dim - 1] + xi[dim - 1] * size[dim - 1];

      double diff2 = 0.0;
      double cross2 = 0.0;
      for (int d = 0; d + 1 < dim; ++d) cross2 += grad[d] * grad[d];
      if (e.part == Part::A) {
        const double dv = val - limit.a_value(xn);
        const double dn = grad[dim - 1] - limit.a_slope(xn);
        diff2 = dv * dv + cross2 + dn * dn;
        a2 += w * diff2;
        ga2 += w * cross2;
      } else {
        const auto lg = limit.b_gradient(xp);
        const double dv = val - limit.b_value(xp);
        double dc = 0.0;
        for (int d = 0; d + 1 < dim; ++d) dc += (grad[d] - lg[d]) * (grad[d] - lg[d]);
        const double dn = grad[dim - 1];
        b2 += w * (dv * dv + dc + dn * dn);
        gb2 += w * dn * dn;
      }
    }
  }
  return {std::sqrt(a2), std::sqrt(b2), std::sqrt(ga2) / p.r, std::sqrt(gb2) / p.h};
}

double cluster_angle(const Mesh& mesh, const Pencil& pencil, const Eigen::MatrixXd& xs,
                     const std::vector<LimitEigenvector>& limit, Regime regime) {
  if (xs.cols() == 0 || limit.empty()) return 0.0;
  const double bscale = b_part_scale(regime, mesh.dim(), pencil.params);
  const PartMasses masses(mesh);
  std::vector<std::vector<double>> dv, lv;
  for (Eigen::Index c = 0; c < xs.cols(); ++c) dv.push_back(scaled_nodes(mesh, pencil, xs.col(c), bscale));
  for (const auto& l : limit) lv.push_back(interpolate_limit(mesh, l));

  auto gram = [&](const auto& u, const auto& v) {
    Eigen::MatrixXd g(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < v.size(); ++j) g(i, j) = masses.product(u[i], v[j]);
    }
    return g;
  };
  // Orthonormal coordinates through the inverse Cholesky factors.
  const Eigen::MatrixXd gd = gram(dv, dv);
  const Eigen::MatrixXd gl = gram(lv, lv);
  const Eigen::MatrixXd cross = gram(dv, lv);
  const Eigen::MatrixXd ld = gd.llt().matrixL();
  const Eigen::MatrixXd ll = gl.llt().matrixL();
  const Eigen::MatrixXd c = ld.triangularView<Eigen::Lower>().solve(
      ll.triangularView<Eigen::Lower>().solve(cross.transpose()).transpose());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
  const auto& s = svd.singularValues();
  const double smallest = s.size() ? s[s.size() - 1] : 0.0;
  return std::acos(std::clamp(smallest, -1.0, 1.0));
}

double orthonormality_check(const Spectrum& spectrum, const Pencil& pencil) {
  return mass_orthonormality_deviation(spectrum.vectors, pencil.M);
}

bool StudyReport::all_bounds_ok() const {
  for (const auto& r : records) {
    for (const auto& m : r.modes) {
      if (!m.bound_ok) return false;
    }
  }
  return true;
}

std::vector<double> StudyReport::errors(int k) const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (!r.complete || k < 1 || k > static_cast<int>(r.modes.size())) continue;
    out.push_back(r.modes[k - 1].match.error);
  }
  return out;
}

RateFit fit_rate(int k, const std::vector<double>& x, const std::vector<double>& y) {
  RateFit f;
  f.k = k;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  f.points = n;
  if (n < 2) {
    f.rate = f.intercept = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  const double den = n * sxx - sx * sx;
  f.rate = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.rate * sx) / n;
  return f;
}

Solved solve_instance(const Geometry& geometry, const MeshLevels& levels, const Grading& grading,
                      const ThinParams& params, int k, const SolverOptions& options) {
  Mesh mesh = make_mesh(geometry, levels, grading);
  const ConstraintSet cs = build_constraints(mesh, params.r);
  Pencil pencil = assemble_pencil(mesh, params, cs);
  Spectrum spectrum = smallest_eigenpairs(pencil, k, options);
  return {std::move(mesh), std::move(pencil), std::move(spectrum)};
}

int worker_count(int jobs) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("THINSPECTRA_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) n = v;
  }
  return std::clamp(n, 1, std::max(1, jobs));
}

namespace {

StudyRecord study_one(const StudyConfig& config, const Geometry& geometry, const LimitSpectrum& limit,
                      const ScheduleEntry& entry) {
  StudyRecord rec;
  rec.n = entry.n;
  rec.params = entry.params;
  try {
    const MeshLevels levels = config.mesh.levels_for(entry.n);
    const Grading grading = config.mesh.grading_for(geometry, levels, entry.params.r);
    Solved s = solve_instance(geometry, levels, grading, entry.params, config.K, config.solver);
    rec.mesh_signature = s.mesh.signature();
    rec.order = s.pencil.order();
    rec.lambdas = s.spectrum.values;
    rec.orthonormality = orthonormality_check(s.spectrum, s.pencil);
    const auto matches = match_spectra(rec.lambdas, limit, config.K);
    for (const auto& m : matches) {
      ModeRecord mr;
      mr.match = m;
      mr.bound_ok = m.discrete <= minmax_bound(m.k) * (1.0 + config.tolerances.bound_slack);
      mr.simple = m.multiplicity == 1;
      const LimitEigenvalue& le = limit.entries[m.entry];
      if (mr.simple) {
        mr.norms = corrector_check(s.mesh, s.pencil, s.spectrum.vectors.col(m.k - 1), le.vectors.front(), 1,
                                   config.regime.kind);
      }
      rec.modes.push_back(mr);
    }
    // one angle per cluster, shared by its members
    for (std::size_t i = 0; i < rec.modes.size();) {
      std::size_t j = i;
      while (j < rec.modes.size() && rec.modes[j].match.entry == rec.modes[i].match.entry) ++j;
      if (!rec.modes[i].simple) {
        const Eigen::MatrixXd xs = s.spectrum.vectors.middleCols(static_cast<Eigen::Index>(i),
                                                                 static_cast<Eigen::Index>(j - i));
        const double angle =
            cluster_angle(s.mesh, s.pencil, xs, limit.entries[rec.modes[i].match.entry].vectors, config.regime.kind);
        for (std::size_t t = i; t < j; ++t) rec.modes[t].cluster_angle = angle;
      }
      i = j;
    }
    rec.complete = true;
  } catch (const Error& e) {
    rec.complete = false;
    rec.warning = e.what();
  }
  return rec;
}

}  // namespace

StudyReport run_convergence_study(const StudyConfig& config) {
  if (config.K < 1) throw Error(ErrorCode::ConfigError, fmt::format("K={} must be >= 1", config.K));
  const Geometry geometry = make_geometry(config.dim, config.omega);
  const RegimeSchedule schedule =
      make_schedule(config.regime, geometry, config.r0, config.rho, config.count, config.first);

  StudyReport report;
  report.config = config;
  report.limit = gathered_spectrum(config.regime, geometry, config.K);
  report.records.resize(schedule.entries.size());

  const int jobs = static_cast<int>(schedule.entries.size());
  const int workers = worker_count(jobs);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < jobs; i = next++) {
      report.records[i] = study_one(config, geometry, report.limit, schedule.entries[i]);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  std::vector<double> rs;
  for (const auto& r : report.records) {
    if (r.complete) rs.push_back(r.params.r);
  }
  for (int k = 1; k <= config.K; ++k) report.rates.push_back(fit_rate(k, rs, report.errors(k)));
  return report;
}

}  // namespace thinspectra
