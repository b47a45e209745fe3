#pragma once

// Cross-sections, thin-parameter schedules and tensor meshes of the rescaled
// two-part domain: the column part A = omega x (0,1) and the slab part
// B = omega x (-1,0). Coordinates are split into the cross-section part x'
// (one or two components) and the axial coordinate x_N.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace thinspectra {

/// Cross-section (c, d) for N = 2; c < 0 < d.
struct Interval {
  double c = -1.0;
  double d = 1.0;
  bool operator==(const Interval&) const = default;
};

/// Centered rectangle (-half_width, half_width) x (-half_height, half_height) for N = 3.
struct Rect {
  double half_width = 0.5;
  double half_height = 0.5;
  bool operator==(const Rect&) const = default;
};

using OmegaSpec = std::variant<Interval, Rect>;

class Geometry {
 public:
  int dim() const noexcept { return dim_; }
  const OmegaSpec& omega() const noexcept { return omega_; }
  double measure() const noexcept { return measure_; }

  bool is_interval() const noexcept { return std::holds_alternative<Interval>(omega_); }
  const Interval& interval() const { return std::get<Interval>(omega_); }
  const Rect& rect() const { return std::get<Rect>(omega_); }

  /// Lower/upper bound of cross-section coordinate `axis` (0 or 1).
  double lower(int axis) const;
  double upper(int axis) const;

  std::string describe() const;

 private:
  friend Geometry make_geometry(int dim, const OmegaSpec& omega);
  int dim_ = 2;
  OmegaSpec omega_{};
  double measure_ = 0.0;
};

/// Throws BadDimension unless dim is 2 (interval) or 3 (rectangle), and
/// NonInteriorOrigin unless 0' lies strictly inside omega.
Geometry make_geometry(int dim, const OmegaSpec& omega);

struct ThinParams {
  double r = 0.5;
  double h = 0.5;
};

/// Validates 0 < r < 1 and 0 < h < 1.
ThinParams make_thin_params(double r, double h);

enum class Regime { Finite, Zero, Infinite };

std::string_view to_string(Regime regime) noexcept;

struct RegimeSpec {
  Regime kind = Regime::Finite;
  double q = 1.0;  // only meaningful for Finite

  static RegimeSpec finite(double q) { return {Regime::Finite, q}; }
  static RegimeSpec zero() { return {Regime::Zero, 0.0}; }
  static RegimeSpec infinite() { return {Regime::Infinite, 0.0}; }
  bool operator==(const RegimeSpec&) const = default;
};

/// Slab thickness h for a given column width r:
///   Finite(q): q r^{N-1};  Zero: r^N;  Infinite: sqrt(r) (N=2), r^2 sqrt(log(1/r)) (N=3).
double regime_height(const RegimeSpec& regime, int dim, double r);

/// h / r^{N-1}, the volume ratio whose limit selects the regime.
double volume_ratio(int dim, const ThinParams& p);

struct ScheduleEntry {
  int n = 0;
  ThinParams params;
};

struct RegimeSchedule {
  RegimeSpec regime;
  double r0 = 0.5;
  double rho = 0.5;
  int first = 0;
  int count = 1;
  std::vector<ScheduleEntry> entries;  // r_n = r0 * rho^n for n = first .. first+count-1
};

/// Generates the (r_n, h_n) sequence and checks every regime inequality on it.
/// Throws RegimeViolation when a generated pair breaks the chain (including an
/// empty r^2 << h << -r^2 log r window for Infinite with N = 3).
RegimeSchedule make_schedule(const RegimeSpec& regime, const Geometry& geometry, double r0, double rho,
                             int count, int first = 0);

enum class Part : std::uint8_t { A = 0, B = 1 };

namespace tags {
inline constexpr std::uint8_t kDirichletTop = 1u << 0;
inline constexpr std::uint8_t kDirichletLateralB = 1u << 1;
inline constexpr std::uint8_t kJunctionA = 1u << 2;
inline constexpr std::uint8_t kJunctionBSurface = 1u << 3;
}  // namespace tags

struct MeshLevels {
  int m_omega = 8;  // cells across omega per cross-section direction
  int m_a = 8;      // axial cells in part A
  int m_b = 8;      // axial cells in part B
};

/// Geometric refinement of the part-B cross-section toward the origin: the cell
/// touching 0' on each side is split into origin_cells + 1 cells whose widths
/// shrink by `ratio`, so the smallest one is base * ratio^origin_cells.
struct Grading {
  int origin_cells = 0;
  double ratio = 0.5;
};

/// Number of grading levels needed so that base * ratio^levels <= target.
int grading_levels_for(double base_width, double target, double ratio);

struct Node {
  std::array<double, 2> xp{};  // cross-section coordinates (second unused for N = 2)
  double xn = 0.0;             // axial coordinate
  Part part = Part::A;
  std::uint8_t tags = 0;
};

/// Axis-aligned tensor cell: 4 nodes (N=2) or 8 nodes (N=3) in lexicographic
/// order, cross-section index varying fastest and the axial index last.
struct Element {
  Part part = Part::A;
  std::array<std::int32_t, 8> nodes{};
  std::array<double, 3> lo{};  // lower corner (x'..., x_N) packed to dim entries
  std::array<double, 3> hi{};
};

/// Structured description of one part: nodal coordinates along each axis.
struct PartGrid {
  Part part = Part::A;
  std::vector<std::vector<double>> axes;  // dim entries: cross-section axes then axial
  std::int32_t node_offset = 0;

  std::int32_t nodes_along(int axis) const { return static_cast<std::int32_t>(axes[axis].size()); }
  std::int32_t node_count() const;
  std::int32_t cell_count() const;
  std::int32_t node_index(std::array<std::int32_t, 3> ijk) const;
};

class Mesh {
 public:
  int dim() const noexcept { return dim_; }
  const Geometry& geometry() const noexcept { return geometry_; }
  const Grading& grading() const noexcept { return grading_; }
  const MeshLevels& levels() const noexcept { return levels_; }
  const PartGrid& grid(Part p) const noexcept { return p == Part::A ? grid_a_ : grid_b_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Element>& elements() const noexcept { return elements_; }

  std::int32_t node_count() const noexcept { return static_cast<std::int32_t>(nodes_.size()); }
  std::int32_t node_count(Part p) const { return grid(p).node_count(); }
  std::int32_t cell_count(Part p) const { return grid(p).cell_count(); }

  /// Volume of all cells of one part.
  double part_volume(Part p) const;
  /// Width of the smallest part-B cross-section cell adjacent to the origin.
  double smallest_origin_width() const;
  /// Short text identifying the mesh resolution, used in study reports.
  std::string signature() const;

 private:
  friend Mesh make_mesh(const Geometry&, const MeshLevels&, const Grading&);
  int dim_ = 2;
  Geometry geometry_;
  MeshLevels levels_;
  Grading grading_;
  PartGrid grid_a_;
  PartGrid grid_b_;
  std::vector<Node> nodes_;
  std::vector<Element> elements_;
};

/// Nodes of a cross-section axis over (lo, hi) with 0 always a node; each side
/// of the origin gets cells in proportion to its length (at least one), and
/// the origin-adjacent cells are graded when grading.origin_cells > 0.
std::vector<double> cross_section_axis(double lo, double hi, int cells, const Grading& grading);

/// Builds both part meshes; throws DegenerateCell if any cell width falls
/// below 1e-14 and InvalidArgument on bad levels or grading ratio.
Mesh make_mesh(const Geometry& geometry, const MeshLevels& levels, const Grading& grading = {});

/// Debug listing: "node <id> <part> <coords...> <tags>" then "elem <id> <part> <node ids...>".
void write_mesh(std::ostream& os, const Mesh& mesh);

}  // namespace thinspectra
