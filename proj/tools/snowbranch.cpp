// snowbranch command-line driver: grid | basis | digraph | run | report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "snowbranch/continuation.hpp"
#include "snowbranch/digraph.hpp"
#include "snowbranch/errors.hpp"
#include "snowbranch/geometry.hpp"
#include "snowbranch/gnga.hpp"
#include "snowbranch/io.hpp"
#include "snowbranch/spectrum.hpp"

namespace fs = std::filesystem;
using namespace snowbranch;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kNumerical = 3, kCap = 4 };

template <class F>
void write_file(const fs::path& p, const RunConfig& cfg, std::string_view kind, F&& body) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw Error(fmt::format("cannot write {}", p.string()));
  out << artifact_header(kind, cfg);
  body(out);
  fmt::print("wrote {}\n", p.string());
}

int cmd_grid(const RunConfig& cfg) {
  const auto grid = build_grid(cfg.level);
  write_file(fs::path(cfg.output_dir) / "grid.txt", cfg, "grid", [&](std::ostream& o) { write_grid(o, grid); });
  return kOk;
}

int cmd_basis(RunConfig cfg) {
  if (cfg.basis_cache.empty()) cfg.basis_cache = (fs::path(cfg.output_dir) / "basis.bin").string();
  bool loaded = false;
  const auto basis = obtain_basis(cfg, &loaded);
  fmt::print("{} {}: level {}, {} modes (requested {}), lambda in [{:.6f}, {:.6f}]\n",
             loaded ? "loaded" : "computed", cfg.basis_cache, basis.level(), basis.size(), basis.requested_size(),
             basis.eigenvalues()[0], basis.eigenvalues()[basis.size() - 1]);
  const fs::path dir(cfg.output_dir);
  write_file(dir / "eigenvalues.txt", cfg, "eigenvalues", [&](std::ostream& o) {
    o << "# index eigenvalue cluster\n";
    for (int j = 0; j < basis.size(); ++j)
      o << fmt::format("{} {:.15g} {}\n", j, basis.eigenvalues()[j], basis.clusters()[static_cast<std::size_t>(j)]);
  });
  write_file(dir / "symmetry_types.txt", cfg, "symmetry-types", [](std::ostream& o) { write_symmetry_table(o); });
  write_file(dir / "isotypic.txt", cfg, "isotypic", [&](std::ostream& o) { write_isotypic_table(o, basis); });
  return kOk;
}

int cmd_digraph(const RunConfig& cfg) {
  const auto& dg = bifurcation_digraph();
  const fs::path dir(cfg.output_dir);
  write_file(dir / "digraph.dot", cfg, "digraph-dot", [&](std::ostream& o) { write_digraph_dot(o, dg); });
  write_file(dir / "digraph.tsv", cfg, "digraph-table", [&](std::ostream& o) { write_digraph_table(o, dg); });
  write_file(dir / "symmetry_types.txt", cfg, "symmetry-types", [](std::ostream& o) { write_symmetry_table(o); });
  fmt::print("{} symmetry types, {} bifurcation kinds, {} edges\n", symmetry_tables().size(), dg.kinds().size(),
             dg.edges().size());
  return kOk;
}

int cmd_run(const RunConfig& cfg) {
  bool loaded = false;
  const auto basis = obtain_basis(cfg, &loaded);
  GalerkinProblem problem(basis);
  const auto dia = orchestrate(problem, cfg.continuation());
  const auto files = write_run(problem, dia, cfg);
  fmt::print("{} branches, {} bifurcation records, {} files in {}\n", dia.branches.size(), dia.records.size(),
             files.size(), cfg.output_dir);
  for (const auto& w : dia.warnings) fmt::print(stderr, "warning: {}\n", w);
  return dia.cap_exhausted ? kCap : kOk;
}

int cmd_report(const RunConfig& cfg) {
  const fs::path p = fs::path(cfg.output_dir) / "report.txt";
  std::ifstream in(p);
  if (!in) throw ConfigError(fmt::format("no report at {}; run 'snowbranch run' first", p.string()));
  std::cout << in.rdbuf();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bifurcation diagrams of the cubic Laplace equation on the Koch snowflake"};
  app.set_version_flag("--version", std::string(version_string()));
  app.set_config("--config", "", "Config file of key = value lines; flags override it");
  app.allow_config_extras(false);
  app.require_subcommand(1);
  app.fallthrough();

  const RunConfig defaults;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> opts;
  for (const auto& [key, def] : defaults.entries())
    opts[key] = app.add_option("--" + key, values[key], fmt::format("(default: {})", def.empty() ? "none" : def));

  auto* grid = app.add_subcommand("grid", "Write the lattice points and their neighbors");
  auto* basis = app.add_subcommand("basis", "Compute (or load) and cache the symmetry-adapted eigenbasis");
  auto* digraph = app.add_subcommand("digraph", "Write the bifurcation digraph as DOT and as a table");
  auto* run = app.add_subcommand("run", "Follow the trivial branch and every daughter branch");
  auto* report = app.add_subcommand("report", "Print the report of a finished run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    RunConfig cfg;
    for (const auto& [key, opt] : opts)
      if (opt->count() > 0) cfg.set(key, values[key]);
    cfg.validate(basis->parsed() || run->parsed());
    if (grid->parsed()) return cmd_grid(cfg);
    if (basis->parsed()) return cmd_basis(cfg);
    if (digraph->parsed()) return cmd_digraph(cfg);
    if (run->parsed()) return cmd_run(cfg);
    if (report->parsed()) return cmd_report(cfg);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfig;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kOther;
  }
  return kOther;
}
