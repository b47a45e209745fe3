#pragma once

// Study configuration files: line-oriented `key = value` pairs grouped in
// `[section]` blocks, `;` starting a comment line.
//
//   [geometry]  dim, omega (c,d for N=2; wx,wy half-widths for N=3)
//   [regime]    kind (finite|zero|infinite), q
//   [schedule]  r0, rho, first, count
//   [study]     K
//   [mesh]      min_cells, exponent_offset, max_cells, grading_ratio, grade_to_r
//   [solver]    block_size, tol, max_iter, seed, subspace
//   [tolerances] final_relative_error, window, bound_slack
//   [output]    dir, emit_svg
//
// Everything except geometry.omega has a default.

#include <iosfwd>
#include <string>
#include <string_view>

#include "thinspectra/study.hpp"

namespace thinspectra {

/// Throws ConfigError naming the offending key ("geometry.omega: required").
StudyConfig parse_config(std::istream& in);
StudyConfig parse_config_text(const std::string& text);
StudyConfig load_config(const std::string& path);

/// Complete text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const StudyConfig& config);

/// "c,d" or "wx,wy" into the matching cross-section; `key` names the source in errors.
OmegaSpec parse_omega(int dim, std::string_view text, std::string_view key = "omega");
RegimeSpec parse_regime(std::string_view kind, double q, std::string_view key = "regime");

/// Locale-independent number parsing for configuration values.
double parse_double(std::string_view text, std::string_view key);
int parse_int(std::string_view text, std::string_view key);
bool parse_bool(std::string_view text, std::string_view key);

}  // namespace thinspectra
