#include <doctest.h>

#include <sys/wait.h>

#include <fmt/format.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "thinspectra/config.hpp"
#include "thinspectra/errors.hpp"
#include "thinspectra/report_io.hpp"

using namespace thinspectra;
namespace fs = std::filesystem;

namespace {

struct Run {
  int exit = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(THINSPECTRA_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int status = pclose(p);
  r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("thinspectra_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<double> lambdas_of(const std::string& out) {
  std::vector<double> v;
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'k') continue;
    const auto a = line.find(','), b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) continue;
    v.push_back(std::stod(line.substr(a + 1, b - a - 1)));
  }
  return v;
}

constexpr const char* kSmallStudy = R"(; small study
[geometry]
dim = 2
omega = -1,1

[regime]
kind = finite
q = 1

[schedule]
r0 = 1
rho = 0.5
first = 2
count = 3

[study]
K = 3
)";

ErrorCode config_code(const std::string& text, std::string* what = nullptr) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  FAIL("config accepted");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("config: defaults and parsed values") {
  const StudyConfig c = parse_config_text(kSmallStudy);
  CHECK(c.dim == 2);
  CHECK(std::get<Interval>(c.omega) == Interval{-1, 1});
  CHECK(c.regime == RegimeSpec::finite(1.0));
  CHECK(c.count == 3);
  CHECK(c.K == 3);
  CHECK(c.mesh == MeshPolicy{});
  CHECK(c.solver == SolverOptions{});
  CHECK(c.output_dir == ".");
}

TEST_CASE("config round trip") {
  const StudyConfig a = parse_config_text(kSmallStudy);
  CHECK(parse_config_text(serialize_config(a)) == a);

  StudyConfig b = a;
  b.dim = 3;
  b.omega = Rect{0.5, 0.75};
  b.regime = RegimeSpec::infinite();
  b.r0 = 0.3;
  b.rho = 0.7;
  b.mesh.grading_ratio = 0.37;
  b.mesh.grade_to_r = false;
  b.solver.tol = 3.3e-11;
  b.solver.seed = 123456789012345ULL;
  b.tolerances.window = 0.015;
  b.output_dir = "out dir";
  b.emit_svg = true;
  CHECK(parse_config_text(serialize_config(b)) == b);
  // and serialization is a fixed point
  CHECK(serialize_config(parse_config_text(serialize_config(b))) == serialize_config(b));
}

TEST_CASE("config errors name the offending key") {
  std::string what;
  CHECK(config_code("[geometry]\ndim = 2\n", &what) == ErrorCode::ConfigError);
  CHECK(what.find("geometry.omega: required") != std::string::npos);
  CHECK(config_code(std::string(kSmallStudy) + "[extra]\nx = 1\n", &what) == ErrorCode::ConfigError);
  CHECK(what.find("extra") != std::string::npos);
  CHECK(config_code("[geometry]\nomega = -1,1\ncolour = red\n", &what) == ErrorCode::ConfigError);
  CHECK(what.find("geometry.colour") != std::string::npos);
  CHECK(config_code("[geometry]\nomega = -1,1\n[schedule]\ncount = 0\n", &what) == ErrorCode::ConfigError);
  CHECK(what.find("schedule.count") != std::string::npos);
  CHECK(config_code("[geometry]\nomega = -1,1\n[schedule]\nrho = 1.5\n", &what) == ErrorCode::ConfigError);
  CHECK(what.find("schedule.rho") != std::string::npos);
  CHECK(config_code("[geometry]\nomega = -1,x\n", &what) == ErrorCode::ConfigError);
  CHECK(config_code("[geometry]\nomega = -1,1\n[regime]\nkind = huge\n", &what) == ErrorCode::ConfigError);
  CHECK(what.find("regime.kind") != std::string::npos);
}

TEST_CASE("number formatting is locale independent with 9 digits") {
  CHECK(num(3.14159265358979) == "3.14159265");
  CHECK(num(2.5e-7) == "2.5e-07");
  CHECK(num(std::nan("")) == "nan");
}

TEST_CASE("cli limit: coupled and infinite examples") {
  const Run a = cli("limit --dim 2 --omega -1,1 --regime finite --q 1 --count 6");
  CHECK(a.exit == 0);
  CHECK(a.out.rfind("2.4674011(1)", 0) == 0);
  CHECK(a.out.find("\n9.8696044(2)") != std::string::npos);
  CHECK(a.out.find("\n22.2066099(1)") != std::string::npos);

  const Run b = cli("limit --dim 2 --omega -0.5,0.5 --regime infinite --count 3");
  CHECK(b.exit == 0);
  CHECK(b.out.find("9.8696044(2)") != std::string::npos);
  CHECK(b.out.find("39.4784176(2)") != std::string::npos);
  CHECK(b.out.find("88.8264396(2)") != std::string::npos);
}

TEST_CASE("cli limit: missing omega") {
  const Run r = cli("limit --dim 2 --regime finite");
  CHECK(r.exit == 2);
  CHECK(r.out.find("omega: required") != std::string::npos);
}

TEST_CASE("cli limit: csv output") {
  const fs::path d = scratch("limit_csv");
  const Run r = cli("limit --dim 3 --omega 0.5,0.5 --count 4 --csv " + (d / "l.csv").string());
  CHECK(r.exit == 0);
  const std::string csv = slurp(d / "l.csv");
  CHECK(csv.rfind("index,lambda,multiplicity,branches\n1,2.4674011,1,ROD_ND\n", 0) == 0);
}

TEST_CASE("cli solve: iterative matches the dense oracle") {
  const Run it = cli("solve --dim 2 --omega -1,1 --r 0.25 --h 0.25 --m 6 --k 4");
  const Run de = cli("solve --dim 2 --omega -1,1 --r 0.25 --h 0.25 --m 6 --k 4 --oracle");
  REQUIRE(it.exit == 0);
  REQUIRE(de.exit == 0);
  const auto a = lambdas_of(it.out), b = lambdas_of(de.out);
  REQUIRE(a.size() == 4);
  REQUIRE(b.size() == 4);
  // printed to 9 digits, so the comparison is limited by formatting
  for (int i = 0; i < 4; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-8 * b[i]);
}

TEST_CASE("cli solve: exhaustion between --k 3 and --k 4") {
  const auto a = lambdas_of(cli("solve --dim 2 --omega -1,2 --r 0.2 --h 0.4 --m 8 --k 3").out);
  const auto b = lambdas_of(cli("solve --dim 2 --omega -1,2 --r 0.2 --h 0.4 --m 8 --k 4").out);
  REQUIRE(a.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10 * a[i]);
}

TEST_CASE("cli solve: exports and N=3") {
  const fs::path d = scratch("solve_export");
  const Run r = cli("solve --dim 3 --omega 0.5,0.5 --r 0.25 --h 0.0625 --m 4 --k 3 --export-mesh " +
                    (d / "mesh.txt").string() + " --export-pencil " + (d / "pencil.txt").string());
  CHECK(r.exit == 0);
  CHECK(slurp(d / "mesh.txt").rfind("mesh dim 3", 0) == 0);
  CHECK(slurp(d / "pencil.txt").rfind("# K", 0) == 0);
  CHECK(r.out.find("# orthonormality") != std::string::npos);
}

TEST_CASE("cli solve: bad input exits 2, solver failure exits 3") {
  CHECK(cli("solve --dim 2 --omega -1,1 --r 1.5").exit == 2);
  CHECK(cli("solve --dim 2 --omega 0,1").exit == 2);
  CHECK(cli("solve --dim 2 --omega -1,1 --m 60 --m-a 60 --k 2 --oracle").exit == 3);  // above the oracle guard
  CHECK(cli("solve --bogus").exit == 2);
}

TEST_CASE("cli study: outputs, determinism and svg") {
  const fs::path d = scratch("study");
  { std::ofstream(d / "s.cfg") << kSmallStudy; }
  const Run a = cli("study --config " + (d / "s.cfg").string() + " --out " + (d / "a").string() + " --emit-svg");
  REQUIRE(a.exit == 0);
  const Run b = cli("study --config " + (d / "s.cfg").string() + " --out " + (d / "b").string() + " --emit-svg");
  REQUIRE(b.exit == 0);
  CHECK(slurp(d / "a" / "report.csv") == slurp(d / "b" / "report.csv"));
  CHECK(slurp(d / "a" / "rates.csv") == slurp(d / "b" / "rates.csv"));

  const std::string report = slurp(d / "a" / "report.csv");
  CHECK(report.rfind("n,r,h,k,lambda_n_k,lambda_limit,error,aH1,bH1,ga,gb,bound_ok\n", 0) == 0);
  CHECK(std::count(report.begin(), report.end(), '\n') == 1 + 3 * 3);
  CHECK(report.find("nan") != std::string::npos);  // the pi^2 cluster has no vector-wise norms

  const std::string svg = slurp(d / "a" / "plot.svg");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.substr(svg.size() - 7) == "</svg>\n");
  const std::regex poly("<polyline [^>]*points=\"([-0-9., ]+)\"/>");
  const auto n = std::distance(std::sregex_iterator(svg.begin(), svg.end(), poly), std::sregex_iterator());
  CHECK(n == 3);
  // every opened element is closed
  const auto opens = std::count(svg.begin(), svg.end(), '<');
  const auto closes = std::count(svg.begin(), svg.end(), '>');
  CHECK(opens == closes);
}

TEST_CASE("cli study: empty schedule and missing config") {
  const fs::path d = scratch("study_bad");
  std::string text = kSmallStudy;
  text.replace(text.find("count = 3"), 9, "count = 0");
  { std::ofstream(d / "bad.cfg") << text; }
  const Run r = cli("study --config " + (d / "bad.cfg").string());
  CHECK(r.exit == 2);
  CHECK(r.out.find("schedule.count") != std::string::npos);
  CHECK(cli("study --config " + (d / "nope.cfg").string()).exit == 2);
  CHECK(cli("study").exit == 2);
}

TEST_CASE("bundled config reaches 5% at the last row") {
  const fs::path d = scratch("bundled");
  const Run r = cli("study --config " + std::string(THINSPECTRA_SOURCE_DIR) + "/configs/q1_interval.cfg --out " +
                    d.string());
  REQUIRE(r.exit == 0);
  std::istringstream in(slurp(d / "report.csv"));
  std::string line, last_k1;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) f.push_back(c);
    if (f.size() == 12 && f[3] == "1") last_k1 = line;
  }
  REQUIRE(!last_k1.empty());
  std::vector<std::string> f;
  std::stringstream ls(last_k1);
  for (std::string c; std::getline(ls, c, ',');) f.push_back(c);
  const double err = std::stod(f[6]), lam = std::stod(f[5]);
  CHECK(err <= 5e-2 * lam);
  CHECK(f[11] == "1");
}

TEST_CASE("cli verify: filtering and the negative control") {
  const Run lim = cli("verify --filter limit");
  CHECK(lim.exit == 0);
  for (int id : {1, 2, 3, 4, 10}) CHECK(lim.out.find(fmt::format("PASS {:>2} ", id)) != std::string::npos);
  CHECK(lim.out.find(" 5 ") == std::string::npos);
  CHECK(std::count(lim.out.begin(), lim.out.end(), '\n') == 5);

  const Run bad = cli("verify --filter arccos --inject-wrong-q");
  CHECK(bad.exit == 1);
  CHECK(bad.out.rfind("FAIL  2 coupled-arccos", 0) == 0);

  CHECK(cli("verify --filter nothing-matches").exit == 1);
}
