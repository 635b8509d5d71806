#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "snowbranch/continuation.hpp"
#include "snowbranch/digraph.hpp"
#include "snowbranch/geometry.hpp"
#include "snowbranch/spectrum.hpp"

namespace snowbranch {

/// Code version string written into every artifact header.
const char* version_string();

inline constexpr int kFormatVersion = 1;

struct RunConfig {
  int level = 3;
  int modes = 50;
  double lambda_min = 0.0;
  double lambda_max = 40.0;
  double step0 = 0.5;
  double newton_tol = 1e-8;
  double secant_tol = 1e-8;
  double null_tol = 1e-6;
  double dedup_tol = 1e-4;
  std::uint64_t seed = 1;
  int max_branches = 500;
  int max_points_per_branch = 20000;
  int max_generation = 64;
  int primaries = 0;
  int threads = 0;
  std::string eigen_method = "auto";
  std::string output_dir = "snowbranch-out";
  std::string basis_cache;  // empty: compute in memory only

  /// Throws ConfigError naming the first offending field. The bound M <= N
  /// only matters to commands that build a basis.
  void validate(bool check_modes = true) const;

  ContinuationSettings continuation() const;
  EigenOptions eigen_options() const;

  /// (key, value) pairs in a fixed order; values print round-trippably.
  std::vector<std::pair<std::string, std::string>> entries() const;
  /// Sets one field from its text form. Throws ConfigError on unknown keys
  /// or unparsable values.
  void set(std::string_view key, std::string_view value);
};

/// Reads "key = value" lines ('#' starts a comment, [sections] are ignored).
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);
std::string format_config(const RunConfig& cfg);

/// "# snowbranch <version> <kind> format=<n>" followed by one "# key = value"
/// line per config entry.
std::string artifact_header(std::string_view kind, const RunConfig& cfg);

void write_grid(std::ostream& out, const SnowflakeGrid& grid);

/// Basis cache: a text magic line, one line of JSON metadata, then raw
/// little-endian doubles (eigenvalues, modes column-major) and int32 tags.
void save_basis(const std::filesystem::path& path, const EigenBasis& basis, const RunConfig& cfg);
EigenBasis load_basis(const std::filesystem::path& path);
/// Loads the cache if it matches cfg.level and the requested mode count,
/// otherwise computes the basis and, if a cache path is set, writes it.
EigenBasis obtain_basis(const RunConfig& cfg, bool* loaded = nullptr);

void write_symmetry_table(std::ostream& out);
/// Per (type, component): irrep dim, kernel bitset, and the basis modes.
void write_isotypic_table(std::ostream& out, const EigenBasis& basis);

void write_digraph_dot(std::ostream& out, const BifurcationDigraph& dg);
void write_digraph_table(std::ostream& out, const BifurcationDigraph& dg);

double norm2_sq(const Eigen::VectorXd& a);
void write_branch(std::ostream& out, const GalerkinProblem& problem, const Branch& branch);
void write_bifurcations(std::ostream& out, const Diagram& dia);
/// Rows "lambda u_at_generic branch_id sym_type" restricted to the window.
void write_diagram_table(std::ostream& out, const GalerkinProblem& problem, const Diagram& dia, double lambda_min,
                         double lambda_max);
/// Symmetry types with at least one point inside [lambda_min, lambda_max].
std::vector<int> types_in_window(const Diagram& dia, double lambda_min, double lambda_max);
void write_report(std::ostream& out, const Diagram& dia, const RunConfig& cfg, const EigenBasis& basis);

/// Writes every run artifact into cfg.output_dir and returns the files written.
std::vector<std::filesystem::path> write_run(const GalerkinProblem& problem, const Diagram& dia, const RunConfig& cfg);

}  // namespace snowbranch
