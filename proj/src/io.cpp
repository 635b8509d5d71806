#include "snowbranch/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "snowbranch/errors.hpp"
#include "snowbranch/group.hpp"

namespace snowbranch {

static_assert(std::endian::native == std::endian::little, "basis cache assumes a little-endian host");

namespace fs = std::filesystem;

const char* version_string() { return SNOWBRANCH_VERSION; }

namespace {

constexpr const char* kBasisMagic = "snowbranch-basis";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  std::string s = trim(text);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  T v{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || s.empty())
    throw ConfigError(fmt::format("config key '{}': cannot parse '{}'", key, s));
  return v;
}

std::string unquote(std::string_view text) {
  std::string s = trim(text);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return s;
}

std::string fmt_double(double x) { return fmt::format("{}", x); }

void require_stream(const std::ios& s, const fs::path& path, const char* what) {
  if (!s) throw Error(fmt::format("cannot {} {}", what, path.string()));
}

double u_at_generic(const GalerkinProblem& problem, const Eigen::VectorXd& a) {
  return problem.value_at(a, kGenericPoint);
}

std::string edge_label(const BifurcationRecord& r) {
  if (r.classification.edges.empty()) return "-";
  std::vector<std::string> q;
  for (const auto* e : r.classification.edges)
    if (std::find(q.begin(), q.end(), e->quotient) == q.end()) q.push_back(e->quotient);
  std::string out;
  for (std::size_t i = 0; i < q.size(); ++i) out += (i ? "," : "") + q[i];
  return out;
}

std::string edge_style(const BifurcationRecord& r) {
  if (r.classification.edges.empty()) return degeneracy_name(r.classification.kind);
  std::vector<std::string> st;
  for (const auto* e : r.classification.edges) {
    std::string s = style_name(e->style);
    if (std::find(st.begin(), st.end(), s) == st.end()) st.push_back(s);
  }
  std::string out;
  for (std::size_t i = 0; i < st.size(); ++i) out += (i ? "," : "") + st[i];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

void RunConfig::validate(bool check_modes) const {
  if (level < 1 || level > 6) throw ConfigError(fmt::format("level must be in 1..6, got {}", level));
  if (modes < 1) throw ConfigError(fmt::format("modes must be positive, got {}", modes));
  const auto n = expected_point_count(level);
  if (check_modes && modes > n) throw ConfigError(fmt::format("modes = {} exceeds the {} grid points of level {}", modes, n, level));
  if (!(lambda_min < lambda_max))
    throw ConfigError(fmt::format("lambda_min ({}) must be below lambda_max ({})", lambda_min, lambda_max));
  if (!(step0 > 0)) throw ConfigError("step0 must be positive");
  for (auto [name, v] : {std::pair{"newton_tol", newton_tol}, std::pair{"secant_tol", secant_tol},
                         std::pair{"null_tol", null_tol}, std::pair{"dedup_tol", dedup_tol}})
    if (!(v > 0)) throw ConfigError(fmt::format("{} must be positive, got {}", name, v));
  if (max_branches < 1) throw ConfigError("max_branches must be positive");
  if (max_points_per_branch < 2) throw ConfigError("max_points_per_branch must be at least 2");
  if (max_generation < 0) throw ConfigError("max_generation must be non-negative");
  if (primaries < 0 || (check_modes && primaries > modes)) throw ConfigError(fmt::format("primaries must be in 0..{}", modes));
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (eigen_method != "auto" && eigen_method != "dense" && eigen_method != "iterative")
    throw ConfigError(fmt::format("eigen_method must be auto, dense or iterative, got '{}'", eigen_method));
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ContinuationSettings RunConfig::continuation() const {
  ContinuationSettings s;
  s.lambda_min = lambda_min;
  s.lambda_max = lambda_max;
  s.step0 = step0;
  s.newton.tol = newton_tol;
  s.secant_tol = secant_tol;
  s.null_tol = null_tol;
  s.dedup_tol = dedup_tol;
  s.max_branches = max_branches;
  s.max_points_per_branch = max_points_per_branch;
  s.max_generation = max_generation;
  s.primaries = primaries;
  s.seed = seed;
  s.threads = threads;
  return s;
}

EigenOptions RunConfig::eigen_options() const {
  EigenOptions o;
  o.method = eigen_method;
  o.seed = seed;
  return o;
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  return {
      {"level", std::to_string(level)},
      {"modes", std::to_string(modes)},
      {"lambda_min", fmt_double(lambda_min)},
      {"lambda_max", fmt_double(lambda_max)},
      {"step0", fmt_double(step0)},
      {"newton_tol", fmt_double(newton_tol)},
      {"secant_tol", fmt_double(secant_tol)},
      {"null_tol", fmt_double(null_tol)},
      {"dedup_tol", fmt_double(dedup_tol)},
      {"seed", std::to_string(seed)},
      {"max_branches", std::to_string(max_branches)},
      {"max_points_per_branch", std::to_string(max_points_per_branch)},
      {"max_generation", std::to_string(max_generation)},
      {"primaries", std::to_string(primaries)},
      {"threads", std::to_string(threads)},
      {"eigen_method", eigen_method},
      {"output_dir", output_dir},
      {"basis_cache", basis_cache},
  };
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const std::string k = trim(key);
  if (k == "level") level = parse_number<int>(k, value);
  else if (k == "modes" || k == "M") modes = parse_number<int>(k, value);
  else if (k == "lambda_min") lambda_min = parse_number<double>(k, value);
  else if (k == "lambda_max") lambda_max = parse_number<double>(k, value);
  else if (k == "step0") step0 = parse_number<double>(k, value);
  else if (k == "newton_tol") newton_tol = parse_number<double>(k, value);
  else if (k == "secant_tol") secant_tol = parse_number<double>(k, value);
  else if (k == "null_tol") null_tol = parse_number<double>(k, value);
  else if (k == "dedup_tol") dedup_tol = parse_number<double>(k, value);
  else if (k == "seed") seed = parse_number<std::uint64_t>(k, value);
  else if (k == "max_branches") max_branches = parse_number<int>(k, value);
  else if (k == "max_points_per_branch") max_points_per_branch = parse_number<int>(k, value);
  else if (k == "max_generation") max_generation = parse_number<int>(k, value);
  else if (k == "primaries") primaries = parse_number<int>(k, value);
  else if (k == "threads") threads = parse_number<int>(k, value);
  else if (k == "eigen_method") eigen_method = unquote(value);
  else if (k == "output_dir") output_dir = unquote(value);
  else if (k == "basis_cache") basis_cache = unquote(value);
  else throw ConfigError(fmt::format("unknown config key '{}'", k));
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    std::string s = trim(std::string_view(line).substr(0, hash));
    if (s.empty() || s.front() == '[') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected key = value", lineno));
    cfg.set(std::string_view(s).substr(0, eq), std::string_view(s).substr(eq + 1));
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  return parse_config(in);
}

std::string format_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : cfg.entries()) {
    const bool text = k == "eigen_method" || k == "output_dir" || k == "basis_cache";
    out += text ? fmt::format("{} = \"{}\"\n", k, v) : fmt::format("{} = {}\n", k, v);
  }
  return out;
}

std::string artifact_header(std::string_view kind, const RunConfig& cfg) {
  std::string out = fmt::format("# snowbranch {} {} format={}\n", version_string(), kind, kFormatVersion);
  for (const auto& [k, v] : cfg.entries()) out += fmt::format("# {} = {}\n", k, v);
  return out;
}

// ---------------------------------------------------------------------------
// grid and basis

void write_grid(std::ostream& out, const SnowflakeGrid& grid) {
  out << fmt::format("# snowflake-grid level={} N={} h={}\n", grid.level(), grid.size(), grid.spacing());
  for (int i = 0; i < grid.size(); ++i) {
    const auto p = grid.point(i);
    const auto nb = grid.neighbors(i);
    std::string line = fmt::format("{} {} {} {}", i, p.x, p.y, nb.size());
    for (int j : nb) line += fmt::format(" {}", j);
    out << line << '\n';
  }
}

void save_basis(const fs::path& path, const EigenBasis& basis, const RunConfig& cfg) {
  nlohmann::json meta;
  meta["format"] = kFormatVersion;
  meta["version"] = version_string();
  meta["level"] = basis.level();
  meta["grid_size"] = basis.grid_size();
  meta["modes"] = basis.size();
  meta["requested_modes"] = basis.requested_size();
  meta["weight"] = basis.weight();
  meta["types"] = kSymmetryTypeCount;
  meta["cluster_tol"] = EigenOptions{}.cluster_tol;
  nlohmann::json c;
  for (const auto& [k, v] : cfg.entries()) c[k] = v;
  meta["config"] = c;

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require_stream(out, path, "write");
  out << kBasisMagic << ' ' << kFormatVersion << '\n' << meta.dump() << '\n';
  out.write(reinterpret_cast<const char*>(basis.eigenvalues().data()),
            static_cast<std::streamsize>(sizeof(double) * basis.size()));
  out.write(reinterpret_cast<const char*>(basis.modes().data()),
            static_cast<std::streamsize>(sizeof(double) * basis.modes().size()));
  for (int t = 0; t < kSymmetryTypeCount; ++t) {
    std::vector<std::int32_t> tags(basis.tags(t).begin(), basis.tags(t).end());
    out.write(reinterpret_cast<const char*>(tags.data()), static_cast<std::streamsize>(sizeof(std::int32_t) * tags.size()));
  }
  require_stream(out, path, "write");
}

EigenBasis load_basis(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require_stream(in, path, "open");
  std::string magic;
  std::getline(in, magic);
  const std::string expect = fmt::format("{} {}", kBasisMagic, kFormatVersion);
  if (magic != expect) throw Error(fmt::format("{}: not a snowbranch basis file (format {})", path.string(), kFormatVersion));
  std::string header;
  std::getline(in, header);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("{}: bad header: {}", path.string(), e.what()));
  }
  const int level = meta.at("level").get<int>();
  const int n = meta.at("grid_size").get<int>();
  const int m = meta.at("modes").get<int>();
  const int requested = meta.at("requested_modes").get<int>();
  const double cluster_tol = meta.at("cluster_tol").get<double>();
  if (meta.at("types").get<int>() != kSymmetryTypeCount) throw Error(fmt::format("{}: wrong type count", path.string()));

  auto grid = std::make_shared<const SnowflakeGrid>(build_grid(level));
  if (grid->size() != n) throw ConsistencyError(fmt::format("{}: grid size {} does not match level {}", path.string(), n, level));
  Eigen::VectorXd values(m);
  Eigen::MatrixXd modes(n, m);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(sizeof(double) * m));
  in.read(reinterpret_cast<char*>(modes.data()), static_cast<std::streamsize>(sizeof(double) * modes.size()));
  std::vector<std::int32_t> tags(static_cast<std::size_t>(kSymmetryTypeCount) * m);
  in.read(reinterpret_cast<char*>(tags.data()), static_cast<std::streamsize>(sizeof(std::int32_t) * tags.size()));
  if (!in) throw Error(fmt::format("{}: truncated basis file", path.string()));

  EigenBasis basis = EigenBasis::assemble(std::move(grid), requested, std::move(values), std::move(modes), cluster_tol);
  for (int t = 0; t < kSymmetryTypeCount; ++t)
    for (int j = 0; j < m; ++j)
      if (basis.tags(t)[static_cast<std::size_t>(j)] != tags[static_cast<std::size_t>(t * m + j)])
        throw ConsistencyError(fmt::format("{}: stored isotypic tag of mode {} for type {} disagrees", path.string(), j, t));
  return basis;
}

EigenBasis obtain_basis(const RunConfig& cfg, bool* loaded) {
  if (loaded) *loaded = false;
  if (!cfg.basis_cache.empty() && fs::exists(cfg.basis_cache)) {
    EigenBasis b = load_basis(cfg.basis_cache);
    if (b.level() == cfg.level && b.requested_size() == cfg.modes) {
      if (loaded) *loaded = true;
      return b;
    }
  }
  EigenBasis b = compute_basis(cfg.level, cfg.modes, cfg.eigen_options());
  if (!cfg.basis_cache.empty()) save_basis(cfg.basis_cache, b, cfg);
  return b;
}

// ---------------------------------------------------------------------------
// group tables

void write_symmetry_table(std::ostream& out) {
  const auto& tables = symmetry_tables();
  out << "# symmetry types: index representative_bits class_size name\n";
  for (const auto& t : tables.types())
    out << fmt::format("type {} {} {} {}\n", t.index, t.representative.hex(), t.class_members.size(), t.name);
  out << "# isotropy subgroups: bits order class_index\n";
  for (const auto& s : tables.all_subgroups()) {
    const int t = tables.type_of(s);
    if (t >= 0) out << fmt::format("subgroup {} {} {}\n", s.hex(), s.order(), t);
  }
}

void write_isotypic_table(std::ostream& out, const EigenBasis& basis) {
  const auto& tables = symmetry_tables();
  out << "# type component dim kernel_bits name modes...\n";
  for (int t = 0; t < tables.size(); ++t) {
    const auto& irreps = function_space_irreps(tables.type(t).representative);
    for (std::size_t c = 0; c < irreps.size(); ++c) {
      const auto modes = basis.modes_in_component(t, static_cast<int>(c));
      std::string line = fmt::format("{} {} {} {} {} {}", t, c, irreps[c].dim, irreps[c].kernel.hex(),
                                     t <= 1 ? d6_component_name(irreps[c]) : std::string("-"), modes.size());
      for (int j : modes) line += fmt::format(" {}", j);
      out << line << '\n';
    }
  }
}

void write_digraph_dot(std::ostream& out, const BifurcationDigraph& dg) {
  const auto& tables = symmetry_tables();
  out << "digraph bifurcations {\n  rankdir=TB;\n  node [shape=box];\n";
  for (const auto& t : tables.types())
    out << fmt::format("  g{} [label=\"Gamma_{}\\n{}\"];\n", t.index, t.index, t.name);
  for (const auto& e : dg.edges())
    out << fmt::format("  g{} -> g{} [label=\"{}\", style={}];\n", e.mother, e.daughter, e.quotient, style_name(e.style));
  out << "}\n";
}

void write_digraph_table(std::ostream& out, const BifurcationDigraph& dg) {
  out << "# mother daughter quotient style irrep_dim\n";
  for (const auto& e : dg.edges())
    out << fmt::format("{} {} {} {} {}\n", e.mother, e.daughter, e.quotient, style_name(e.style), e.irrep_dim);
}

// ---------------------------------------------------------------------------
// run artifacts

double norm2_sq(const Eigen::VectorXd& a) { return a.squaredNorm(); }

void write_branch(std::ostream& out, const GalerkinProblem& problem, const Branch& branch) {
  out << fmt::format("# branch {} type {} parent {} via {} generation {} status {}\n", branch.id, branch.symmetry_type,
                     branch.parent_branch.empty() ? "-" : branch.parent_branch,
                     branch.parent_bifurcation.empty() ? "-" : branch.parent_bifurcation, branch.generation,
                     branch_status_name(branch.status));
  if (!branch.note.empty()) out << "# note: " << branch.note << '\n';
  out << "# lambda J MI sym_type norm2_sq u_at_generic a_1 ... a_M\n";
  for (const auto& p : branch.points) {
    std::string line = fmt::format("{:.12g} {:.12g} {} {} {:.12g} {:.12g}", p.lambda, p.J, p.morse_index,
                                   p.symmetry_type, norm2_sq(p.a), u_at_generic(problem, p.a));
    for (Eigen::Index j = 0; j < p.a.size(); ++j) line += fmt::format(" {:.12g}", p.a[j]);
    out << line << '\n';
  }
}

void write_bifurcations(std::ostream& out, const Diagram& dia) {
  out << "# id lambda_star mother mi_before mi_after center_dim edge_label style\n";
  for (const auto& r : dia.records)
    out << fmt::format("{} {:.12g} {} {} {} {} {} {}\n", r.id, r.lambda_star, r.mother_branch, r.mi_before, r.mi_after,
                       r.center_dim, edge_label(r), edge_style(r));
}

void write_diagram_table(std::ostream& out, const GalerkinProblem& problem, const Diagram& dia, double lambda_min,
                         double lambda_max) {
  out << "# lambda u_at_generic branch_id sym_type\n";
  for (const auto& b : dia.branches)
    for (const auto& p : b.points) {
      if (p.lambda < lambda_min - 1e-12 || p.lambda > lambda_max + 1e-12) continue;
      out << fmt::format("{:.12g}\t{:.12g}\t{}\t{}\n", p.lambda, u_at_generic(problem, p.a), b.id, b.symmetry_type);
    }
}

std::vector<int> types_in_window(const Diagram& dia, double lambda_min, double lambda_max) {
  std::set<int> s;
  for (const auto& b : dia.branches)
    for (const auto& p : b.points)
      if (p.lambda >= lambda_min - 1e-12 && p.lambda <= lambda_max + 1e-12) s.insert(b.symmetry_type);
  return {s.begin(), s.end()};
}

void write_report(std::ostream& out, const Diagram& dia, const RunConfig& cfg, const EigenBasis& basis) {
  const auto& tables = symmetry_tables();
  out << fmt::format("level {}  grid points {}  modes {} (requested {})\n", basis.level(), basis.grid_size(),
                     basis.size(), basis.requested_size());
  out << fmt::format("trivial branch from lambda = {:.6f} down to {}\n", trivial_start(basis, cfg.continuation()),
                     cfg.lambda_min);
  out << fmt::format("branches {}  bifurcation records {}  cap exhausted {}\n\n", dia.branches.size(),
                     dia.records.size(), dia.cap_exhausted ? "yes" : "no");

  out << "branch tree\n";
  std::map<std::string, std::vector<const Branch*>> children;
  for (const auto& b : dia.branches) children[b.parent_branch].push_back(&b);
  std::map<std::string, const BifurcationRecord*> rec_by_id;
  for (const auto& r : dia.records) rec_by_id[r.id] = &r;
  auto print = [&](auto&& self, const Branch& b, int depth) -> void {
    std::string via;
    if (const auto it = rec_by_id.find(b.parent_bifurcation); it != rec_by_id.end())
      via = fmt::format(" from {} at lambda* = {:.6f}", it->first, it->second->lambda_star);
    const double lo = b.points.empty() ? 0.0 : b.points.back().lambda;
    const double hi = b.points.empty() ? 0.0 : b.points.front().lambda;
    out << fmt::format("{}{} S{} {}{}  lambda [{:.4f}, {:.4f}]  {} points  {}{}\n", std::string(2 * depth + 2, ' '),
                       b.id, b.symmetry_type, tables.type(b.symmetry_type).name, via, lo, hi, b.points.size(),
                       branch_status_name(b.status), b.note.empty() ? "" : " (" + b.note + ")");
    if (const auto it = children.find(b.id); it != children.end())
      for (const auto* c : it->second) self(self, *c, depth + 1);
  };
  if (const auto it = children.find(""); it != children.end())
    for (const auto* b : it->second) print(print, *b, 0);

  out << "\nbifurcations\n";
  for (const auto& r : dia.records) {
    out << fmt::format("  {} lambda* = {:.6f} on {} (S{})  MI {} -> {}  center_dim {}  {} {}{}\n", r.id,
                       r.lambda_star, r.mother_branch, r.mother_type, r.mi_before, r.mi_after, r.center_dim,
                       edge_label(r), edge_style(r), r.clean ? "" : "  [not clean]");
    for (const auto& u : r.unseeded) out << "    unseeded: " << u << '\n';
    if (!r.note.empty()) out << "    note: " << r.note << '\n';
  }

  std::set<int> all;
  for (const auto& b : dia.branches) all.insert(b.symmetry_type);
  out << "\nsymmetry types found:";
  for (int t : all) out << " S" << t;
  out << fmt::format("\nsymmetry types in window [{}, {}]:", cfg.lambda_min, cfg.lambda_max);
  for (int t : types_in_window(dia, cfg.lambda_min, cfg.lambda_max)) out << " S" << t;
  out << '\n';
  if (!dia.warnings.empty()) {
    out << "\nwarnings\n";
    for (const auto& w : dia.warnings) out << "  " << w << '\n';
  }
}

std::vector<fs::path> write_run(const GalerkinProblem& problem, const Diagram& dia, const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir / "branches");
  std::vector<fs::path> written;
  auto emit = [&](const fs::path& p, std::string_view kind, auto&& body) {
    std::ofstream out(p);
    require_stream(out, p, "write");
    out << artifact_header(kind, cfg);
    body(out);
    require_stream(out, p, "write");
    written.push_back(p);
  };
  for (const auto& b : dia.branches)
    emit(dir / "branches" / (b.id + ".txt"), "branch", [&](std::ostream& o) { write_branch(o, problem, b); });
  emit(dir / "bifurcations.txt", "bifurcations", [&](std::ostream& o) { write_bifurcations(o, dia); });
  emit(dir / "diagram.tsv", "diagram",
       [&](std::ostream& o) { write_diagram_table(o, problem, dia, cfg.lambda_min, cfg.lambda_max); });
  emit(dir / "report.txt", "report", [&](std::ostream& o) { write_report(o, dia, cfg, problem.basis()); });
  return written;
}

}  // namespace snowbranch
