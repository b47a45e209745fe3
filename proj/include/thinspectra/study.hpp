#pragma once

// Convergence experiments over a regime schedule: one FEM solve per n,
// matching against the gathered limit spectrum, corrector norms for simple
// limit eigenvalues and subspace angles for clusters.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "thinspectra/assembly.hpp"
#include "thinspectra/eigensolve.hpp"
#include "thinspectra/geometry_mesh.hpp"
#include "thinspectra/limit_spectra.hpp"

namespace thinspectra {

/// Mesh resolution as a function of the schedule index:
/// m = max(min_cells, 2^(n + exponent_offset)), capped by max_cells when > 0,
/// used for the cross-section and both axial directions. The part-B
/// cross-section is graded until the origin cell is no wider than r.
struct MeshPolicy {
  int min_cells = 8;
  int exponent_offset = 1;
  int max_cells = 0;
  double grading_ratio = 0.5;
  bool grade_to_r = true;
  bool operator==(const MeshPolicy&) const = default;

  MeshLevels levels_for(int n) const;
  Grading grading_for(const Geometry& geometry, const MeshLevels& levels, double r) const;
};

struct StudyTolerances {
  double final_relative_error = 0.05;  // last-row e_{n,1} / lambda_1
  double window = 0.02;                // relative half-width of multiplicity windows
  double bound_slack = 1e-12;          // lambda_{n,k} <= 2^k k^2 pi^2 (1 + slack)
  bool operator==(const StudyTolerances&) const = default;
};

struct StudyConfig {
  int dim = 2;
  OmegaSpec omega = Interval{-1.0, 1.0};
  RegimeSpec regime = RegimeSpec::finite(1.0);
  double r0 = 1.0;
  double rho = 0.5;
  int first = 2;
  int count = 4;
  int K = 4;
  MeshPolicy mesh;
  SolverOptions solver;
  StudyTolerances tolerances;
  std::string output_dir = ".";
  bool emit_svg = false;
  bool operator==(const StudyConfig&) const = default;
};

struct MatchedPair {
  int k = 0;  // 1-based position in the multiplicity-expanded list
  double limit = 0.0;
  double discrete = 0.0;
  double error = 0.0;
  int entry = 0;         // index into LimitSpectrum::entries
  int multiplicity = 1;  // of that entry
};

/// In-order pairing of ascending discrete values with the multiplicity-expanded
/// limit values (first K). Throws OrderViolation if `discrete` is not
/// ascending and InvalidArgument if it holds fewer than K values.
std::vector<MatchedPair> match_spectra(const std::vector<double>& discrete, const LimitSpectrum& limit, int K);

/// Proposition bound 2^k k^2 pi^2 for the k-th eigenvalue (1-based).
double minmax_bound(int k);

struct CorrectorNorms {
  double aH1 = 0.0;
  double bH1 = 0.0;
  double ga = 0.0;
  double gb = 0.0;
};

/// Scale applied to the part-B values of an M-normalized discrete vector so
/// that it is unit-normalized in the limit product of the regime: 1 for the
/// finite regime, sqrt(h / r^{N-1}) otherwise.
double b_part_scale(Regime regime, int dim, const ThinParams& params);

/// Node values of a limit eigenvector on the mesh (u_a at part-A nodes,
/// u_b at part-B nodes).
std::vector<double> interpolate_limit(const Mesh& mesh, const LimitEigenvector& u);

/// Corrector norms of one discrete eigenvector (free-dof vector of `pencil`,
/// M-normalized) against a simple limit eigenvector. The sign is chosen so
/// that the vector correlates positively with the interpolated limit.
/// Throws ClusterSkipped when `limit_multiplicity` > 1.
CorrectorNorms corrector_check(const Mesh& mesh, const Pencil& pencil, const Eigen::VectorXd& x,
                               const LimitEigenvector& limit, int limit_multiplicity, Regime regime);

/// Largest principal angle (radians) between the span of discrete vectors
/// and the span of limit vectors, after the same b-part scaling, measured in
/// the unweighted L2 product of both parts.
double cluster_angle(const Mesh& mesh, const Pencil& pencil, const Eigen::MatrixXd& xs,
                     const std::vector<LimitEigenvector>& limit, Regime regime);

/// max |x_i^T M x_j - delta_ij|
double orthonormality_check(const Spectrum& spectrum, const Pencil& pencil);

struct ModeRecord {
  MatchedPair match;
  bool bound_ok = true;
  bool simple = true;
  std::optional<CorrectorNorms> norms;  // empty for clusters
  double cluster_angle = 0.0;           // radians, clusters only
};

struct StudyRecord {
  int n = 0;
  ThinParams params;
  std::string mesh_signature;
  int order = 0;
  std::vector<double> lambdas;
  std::vector<ModeRecord> modes;
  double orthonormality = 0.0;
  bool complete = false;
  std::string warning;
};

struct RateFit {
  int k = 0;
  double rate = 0.0;  // slope of log e_{n,k} against log r_n
  double intercept = 0.0;
  int points = 0;
};

struct StudyReport {
  StudyConfig config;
  LimitSpectrum limit;
  std::vector<StudyRecord> records;  // ordered by n
  std::vector<RateFit> rates;

  bool all_bounds_ok() const;
  /// e_{n,k} for the complete records, in order of n.
  std::vector<double> errors(int k) const;
};

/// Least-squares slope of log y against log x over positive pairs.
RateFit fit_rate(int k, const std::vector<double>& x, const std::vector<double>& y);

/// Solves one (mesh, r, h) instance; shared by the study and the CLI.
struct Solved {
  Mesh mesh;
  Pencil pencil;
  Spectrum spectrum;
};
Solved solve_instance(const Geometry& geometry, const MeshLevels& levels, const Grading& grading,
                      const ThinParams& params, int k, const SolverOptions& options);

/// Worker count: THINSPECTRA_THREADS when set and positive, else the
/// hardware concurrency, never more than `jobs`.
int worker_count(int jobs);

/// Runs every schedule index (in parallel when workers allow). Solver and
/// geometry errors of one index mark that record incomplete; configuration
/// errors propagate.
StudyReport run_convergence_study(const StudyConfig& config);

}  // namespace thinspectra
