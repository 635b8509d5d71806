#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "snowbranch/errors.hpp"
#include "snowbranch/io.hpp"
#include "support.hpp"

using namespace snowbranch;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::current_path() / "io-scratch" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# comment\n[run]\nlevel = 4\nM = 100   ; trailing comment\nlambda_max = 60.5\nseed = 7\n"
      "eigen_method = \"dense\"\noutput_dir = 'out dir'\n");
  const auto cfg = parse_config(in);
  CHECK(cfg.level == 4);
  CHECK(cfg.modes == 100);
  CHECK(cfg.lambda_max == 60.5);
  CHECK(cfg.seed == 7);
  CHECK(cfg.eigen_method == "dense");
  CHECK(cfg.output_dir == "out dir");
  CHECK(cfg.lambda_min == 0.0);
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("round trip through the text form") {
    RunConfig c = cfg;
    c.newton_tol = 1.2345678901234567e-9;
    c.step0 = 0.1;
    std::istringstream again(format_config(c));
    const auto d = parse_config(again);
    CHECK(d.entries() == c.entries());
    CHECK(d.newton_tol == c.newton_tol);
  }

  SUBCASE("errors") {
    RunConfig c;
    CHECK_THROWS_AS(c.set("no_such_key", "1"), ConfigError);
    CHECK_THROWS_AS(c.set("level", "three"), ConfigError);
    CHECK_THROWS_AS(c.set("level", "3.5"), ConfigError);
    std::istringstream bad("level 3\n");
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    c = RunConfig{};
    c.level = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.level = 7;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.level = 2;
    c.modes = 14;  // 13 points
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_NOTHROW(c.validate(false));
    c = RunConfig{};
    c.lambda_min = 10.0;
    c.lambda_max = 5.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.eigen_method = "lanczos";
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.newton_tol = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(load_config("does/not/exist.toml"), ConfigError);
  }
}

TEST_CASE("artifact header") {
  RunConfig cfg;
  const auto h = artifact_header("report", cfg);
  CHECK(h.rfind(std::string("# snowbranch ") + version_string() + " report format=1\n", 0) == 0);
  for (const auto& [k, v] : cfg.entries()) CHECK(h.find("# " + k + " = " + v + "\n") != std::string::npos);
}

TEST_CASE("grid dump") {
  const auto g = build_grid(2);
  std::ostringstream a, b;
  write_grid(a, g);
  write_grid(b, build_grid(2));
  CHECK(a.str() == b.str());
  const auto lines = data_lines(a.str());
  CHECK(lines.size() == 13);
  std::istringstream head(a.str());
  std::string first;
  std::getline(head, first);
  CHECK(first.find("level=2") != std::string::npos);
  CHECK(first.find("N=13") != std::string::npos);
  // h = 2/9 printed round-trippably
  const auto pos = first.find("h=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(first.substr(pos + 2)) == 2.0 / 9.0);
  // each line: index x y degree neighbours
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::istringstream in(lines[i]);
    int idx = -1, deg = -1;
    double x = 0, y = 0;
    in >> idx >> x >> y >> deg;
    CHECK(idx == static_cast<int>(i));
    CHECK(deg == g.degree(idx));
    CHECK(x == g.point(idx).x);
    CHECK(y == g.point(idx).y);
  }
}

TEST_CASE("basis cache") {
  const auto dir = scratch("basis");
  RunConfig cfg;
  cfg.level = 3;
  cfg.modes = 20;
  cfg.basis_cache = (dir / "b.bin").string();

  testing::Stopwatch sw;
  bool loaded = true;
  const auto b1 = obtain_basis(cfg, &loaded);
  CHECK(sw.seconds() < 10.0);
  CHECK_FALSE(loaded);
  REQUIRE(fs::exists(cfg.basis_cache));

  const auto b2 = obtain_basis(cfg, &loaded);
  CHECK(loaded);
  CHECK(b2.level() == 3);
  CHECK(b2.size() == b1.size());
  CHECK(b2.eigenvalues() == b1.eigenvalues());
  CHECK(b2.modes() == b1.modes());
  for (int t = 0; t < kSymmetryTypeCount; ++t) CHECK(b2.tags(t) == b1.tags(t));

  // saving the loaded basis reproduces the file byte for byte
  save_basis(dir / "c.bin", b2, cfg);
  CHECK(slurp(dir / "c.bin") == slurp(cfg.basis_cache));

  // ascending eigenvalues, ties within 1e-8 share a cluster
  const auto& ev = b1.eigenvalues();
  for (int j = 1; j < b1.size(); ++j) {
    CHECK(ev[j] >= ev[j - 1] - 1e-8 * ev[j]);
    if (std::abs(ev[j] - ev[j - 1]) <= 1e-8 * ev[j]) CHECK(b1.clusters()[j] == b1.clusters()[j - 1]);
  }

  // a cache for a different size is not reused
  cfg.modes = 10;
  obtain_basis(cfg, &loaded);
  CHECK_FALSE(loaded);

  std::ofstream(dir / "junk.bin") << "not a basis\n";
  CHECK_THROWS_AS(load_basis(dir / "junk.bin"), Error);
}

TEST_CASE("run artifacts") {
  RunConfig cfg;
  cfg.level = 3;
  cfg.modes = 20;
  cfg.primaries = 2;
  cfg.max_generation = 1;
  cfg.threads = 2;
  cfg.output_dir = scratch("run").string();
  const GalerkinProblem p(testing::level3_basis(20));

  const auto d1 = orchestrate(p, cfg.continuation());
  const auto files = write_run(p, d1, cfg);
  std::vector<std::string> first;
  for (const auto& f : files) first.push_back(slurp(f));
  const auto d2 = orchestrate(p, cfg.continuation());
  const auto again = write_run(p, d2, cfg);
  REQUIRE(again.size() == files.size());
  for (std::size_t i = 0; i < files.size(); ++i) CHECK_MESSAGE(slurp(again[i]) == first[i], files[i].string());

  for (const auto& f : files) CHECK(slurp(f).rfind("# snowbranch ", 0) == 0);
  const fs::path dir(cfg.output_dir);
  CHECK(fs::exists(dir / "report.txt"));
  CHECK(fs::exists(dir / "bifurcations.txt"));
  CHECK(fs::exists(dir / "diagram.tsv"));

  SUBCASE("trivial branch file: MI counts the eigenvalues below lambda") {
    const auto& ev = p.basis().eigenvalues();
    const auto lines = data_lines(slurp(dir / "branches" / "b0.txt"));
    REQUIRE(!lines.empty());
    int checked = 0;
    for (const auto& l : lines) {
      std::istringstream in(l);
      double lam = 0, J = 0;
      int mi = -1;
      in >> lam >> J >> mi;
      CHECK(J == 0.0);
      bool near = false;
      int below = 0;
      for (int j = 0; j < ev.size(); ++j) {
        if (std::abs(ev[j] - lam) <= 1e-6 * ev[j]) near = true;
        if (ev[j] < lam) ++below;
      }
      if (near) continue;
      CHECK(mi == below);
      ++checked;
    }
    CHECK(checked > 10);
  }

  SUBCASE("bifurcation table rows match the records") {
    const auto lines = data_lines(slurp(dir / "bifurcations.txt"));
    CHECK(lines.size() == d1.records.size());
  }
}
