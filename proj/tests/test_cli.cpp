#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "commands.hpp"
#include "config.hpp"
#include "ehs/version.hpp"
#include "json.hpp"
#include "table.hpp"

using namespace ehs;
using namespace ehs::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ehs_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args, const fs::path& err) {
  const std::string cmd = std::string(EHS_CLI_PATH) + " " + args + " > /dev/null 2> " + err.string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string config_error(const std::string& text, const std::string& command) {
  try {
    parse_config(text, command, "cfg.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* small_spectrum = R"(seed: 3
spectrum:
  kappa: 1.0
  scans:
    - {name: ring, axes: [q1, q2], range: [-2, 2], n: 21}
  rotations: {samples: 33}
  random_points: {count: 50}
)";

}  // namespace

TEST_CASE("config defaults and resolution") {
  const RunConfig c = parse_config("", "chern");
  CHECK(c.chern.R == std::vector<double>{0.25, 0.5, 2.0, 4.0});
  CHECK(c.chern.grid == std::array<int, 4>{24, 24, 24, 24});
  const Json j = resolved_json(c);
  CHECK(j["command"] == "chern");
  CHECK(j["chern"]["fail_defect"] == 0.05);
  CHECK(!j.contains("wilson"));

  const RunConfig s = parse_config(small_spectrum, "spectrum");
  REQUIRE(s.spectrum.scans.size() == 1);
  CHECK(s.spectrum.scans[0].n == 21);
  CHECK(s.seed == 3);
  // blocks of other commands are ignored
  CHECK_NOTHROW(parse_config("wilson: {kappa: 2}\nchern: {kappa: 1}\n", "chern"));
  CHECK(parse_config("cqed: {model: {drives: auto}}", "cqed").cqed.model.auto_drives);
  const RunConfig m = parse_config("cqed: {model: {drives: {lambda: [0.001, 0, 0, 0]}}}", "cqed");
  CHECK(!m.cqed.model.auto_drives);
  CHECK(m.cqed.model.lambda[0] == 0.001);
}

TEST_CASE("config diagnostics carry line and field") {
  CHECK(config_error("chern:\n  R: []\n", "chern").find("cfg.yaml:2:6: chern.R: needs at least 1 entries") == 0);
  CHECK(config_error("chern:\n  kapa: 1\n", "chern").find("cfg.yaml:2:3: chern.kapa: unknown key") == 0);
  CHECK(config_error("chern:\n  kappa: abc\n", "chern").find("chern.kappa: expected a number, got 'abc'") !=
        std::string::npos);
  CHECK(config_error("chern:\n  grid: [24, 24, 4, 24]\n", "chern").find("grid counts must be >= 8") !=
        std::string::npos);
  CHECK(config_error("chern: [1, 2\n", "chern").find("cfg.yaml:") == 0);
  CHECK(config_error("spectrum:\n  scans:\n    - {axes: [q1, q4]}\n", "spectrum").find("spectrum.scans[0].axes") !=
        std::string::npos);
  CHECK(config_error("cqed:\n  model: {fock_cutoff: 1}\n", "cqed").find("cqed.model.fock_cutoff") !=
        std::string::npos);
  CHECK(config_error("cqed:\n  trajectory: {model: lab}\n", "cqed").find("must be one of effective, full") !=
        std::string::npos);
  CHECK(config_error("seed: -1\n", "chern").find("seed") != std::string::npos);
  CHECK(config_error("", "bogus").find("unknown command") != std::string::npos);
}

TEST_CASE("table rendering") {
  DataTable t("demo");
  t.real("x").complex("z").text("status");
  t.row() << 0.1 << cd(1.0, -2.5) << "ok";
  t.row() << -0.0 << cd(1e-300, 3.0) << "a,b";
  OutputContext ctx;
  ctx.command = "test";
  ctx.config = Json{{"k", 1}};
  const std::string csv = render(t, ctx);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == std::string("# ehs ") + version_string);
  std::getline(in, line);
  CHECK(line == "# command: test");
  std::getline(in, line);
  CHECK(line == "# table: demo");
  std::getline(in, line);
  CHECK(line == "# config: {\"k\":1}");
  std::getline(in, line);
  CHECK(line == "x,z_re,z_im,status");
  std::getline(in, line);
  CHECK(line == "0.10000000000000001,1,-2.5,ok");
  std::getline(in, line);
  CHECK(line == "0,1e-300,3,\"a,b\"");

  ctx.format = Format::json;
  const Json j = Json::parse(render(t, ctx));
  CHECK(j["version"] == version_string);
  CHECK(j["columns"].size() == 4);
  CHECK(j["rows"][0][0].get<double>() == 0.1);
  CHECK(j["rows"][1][3] == "a,b");
  CHECK(j["config"]["k"] == 1);

  DataTable bad("bad");
  bad.real("x");
  bad.row() << 1.0 << 2.0;
  CHECK_THROWS(render(bad, ctx));
  CHECK(format_number(std::nan("")) == "nan");
  // 17 significant digits round-trip every double
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10000; ++k) {
    double v;
    const std::uint64_t bits = rng();
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v) || v == 0.0) continue;
    CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("spectrum command is byte-deterministic across thread counts") {
  const fs::path dir = scratch("spectrum");
  const fs::path cfg = write_file(dir, "cfg.yaml", small_spectrum);
  CHECK(run("spectrum --config " + cfg.string() + " --out " + (dir / "a").string() + " --threads 1", dir / "e1") == 0);
  CHECK(run("spectrum --config " + cfg.string() + " --out " + (dir / "b").string() + " --threads 3", dir / "e2") == 0);
  CHECK(run("spectrum --config " + cfg.string() + " --out " + (dir / "c").string() + " --format json", dir / "e3") ==
        0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    ++files;
    CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
    const std::string text = slurp(e.path());
    CHECK(text.find("# config: {\"command\":\"spectrum\",\"seed\":3") != std::string::npos);
  }
  CHECK(files == 4);
  const Json j = Json::parse(slurp(dir / "c" / "spectrum_random.json"));
  CHECK(j["rows"].size() == 50);
  CHECK(j["config"]["spectrum"]["random_points"]["count"] == 50);

  // a different seed changes the random table only
  const fs::path cfg2 = write_file(dir, "cfg2.yaml", std::string(small_spectrum).replace(6, 1, "4"));
  CHECK(run("spectrum --config " + cfg2.string() + " --out " + (dir / "d").string(), dir / "e4") == 0);
  CHECK(slurp(dir / "a" / "spectrum_random.csv") != slurp(dir / "d" / "spectrum_random.csv"));
}

TEST_CASE("ring scan locates the exceptional ring") {
  const RunConfig c = parse_config(
      "spectrum:\n  scans:\n    - {name: ring, axes: [q1, q2], range: [-2, 2], n: 81}\n  rotations: {samples: 33}\n",
      "spectrum");
  OutputContext ctx;
  ctx.dir = scratch("ring").string();
  ctx.command = "spectrum";
  ctx.config = resolved_json(c);
  const Outcome o = cmd_spectrum(c, ctx);
  CHECK(o.failures.empty());
  std::istringstream in(slurp(fs::path(ctx.dir) / "spectrum_locus.csv"));
  std::string line;
  for (int k = 0; k < 6; ++k) std::getline(in, line);
  // ring,points,spacing,min_gap,count,r_min,r_max
  std::vector<std::string> f;
  std::stringstream ls(line);
  for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
  REQUIRE(f.size() == 7);
  CHECK(std::abs(std::stod(f[5]) - 1.0) < 0.05);
  CHECK(std::abs(std::stod(f[6]) - 1.0) < 0.05);

  // Hermitian case: zero gap only at the origin sample
  const RunConfig h = parse_config(
      "spectrum:\n  kappa: 0\n  locus_gap: 1e-9\n  scans:\n    - {name: ring, axes: [q1, q2], range: [-2, 2], n: 41}\n"
      "  rotations: {samples: 33}\n",
      "spectrum");
  ctx.config = resolved_json(h);
  cmd_spectrum(h, ctx);
  std::istringstream in2(slurp(fs::path(ctx.dir) / "spectrum_locus.csv"));
  for (int k = 0; k < 6; ++k) std::getline(in2, line);
  CHECK(line == "ring,1681,0.10000000000000001,0,1,0,0");
}

TEST_CASE("exit codes and failure enumeration") {
  const fs::path dir = scratch("exit");
  const fs::path bad = write_file(dir, "bad.yaml", "chern:\n  R: [2.0, oops]\n");
  CHECK(run("chern --config " + bad.string() + " --out " + (dir / "o").string(), dir / "err") == 2);
  CHECK(slurp(dir / "err").find("bad.yaml:2:12: chern.R: expected a number, got 'oops'") != std::string::npos);
  CHECK(!fs::exists(dir / "o"));

  CHECK(run("chern --config " + bad.string() + " --out " + (dir / "o").string() + " --format xml", dir / "err") == 2);
  CHECK(run("chern --out x", dir / "err") == 2);

  const fs::path part = write_file(dir, "part.yaml", "chern:\n  R: [1.0, 2.0]\n  grid: [10, 10, 10, 10]\n");
  CHECK(run("chern --config " + part.string() + " --out " + (dir / "p").string(), dir / "err") == 1);
  const std::string err = slurp(dir / "err");
  CHECK(err.find("1 point(s) failed") != std::string::npos);
  CHECK(err.find("c2 R=1: TransitionPoint") != std::string::npos);
  const std::string csv = slurp(dir / "p" / "chern_c2.csv");
  CHECK(csv.find("\n1,1,nan,nan,nan,0,10,10,10,10,TransitionPoint\n") != std::string::npos);
  CHECK(csv.find(",ok\n") != std::string::npos);
}

TEST_CASE("chern command on the Hermitian point") {
  const RunConfig c = parse_config("chern:\n  kappa: 0\n  R: [1.0]\n  grid: [16, 16, 16, 16]\n", "chern");
  OutputContext ctx;
  ctx.dir = scratch("herm").string();
  ctx.command = "chern";
  ctx.format = Format::json;
  ctx.config = resolved_json(c);
  CHECK(cmd_chern(c, ctx).failures.empty());
  const Json j = Json::parse(slurp(fs::path(ctx.dir) / "chern_c2.json"));
  CHECK(std::abs(j["rows"][0][2].get<double>() - 1.0) < 0.02);
}

TEST_CASE("cqed command without loss") {
  const RunConfig c = parse_config(
      "cqed:\n  model: {kappa: 0}\n  trajectory: {samples: 5}\n  fits: {points: []}\n  protocol: {R_over_kappa: []}\n",
      "cqed");
  OutputContext ctx;
  ctx.dir = scratch("cqed").string();
  ctx.command = "cqed";
  ctx.format = Format::json;
  ctx.config = resolved_json(c);
  const Outcome o = cmd_cqed(c, ctx);
  CHECK(o.failures.empty());
  CHECK(o.files.size() == 4);
  const Json j = Json::parse(slurp(fs::path(ctx.dir) / "cqed_mapping.json"));
  const auto& cols = j["columns"];
  const auto at = [&](const std::string& name) {
    for (std::size_t k = 0; k < cols.size(); ++k)
      if (cols[k] == name) return j["rows"][0][k];
    return Json();
  };
  CHECK(at("kappa_eff").get<double>() == 0.0);
  CHECK(at("status") == "ok");
  CHECK(at("relative_residual").get<double>() < 1e-3);
  const Json t = Json::parse(slurp(fs::path(ctx.dir) / "cqed_trajectory.json"));
  CHECK(t["rows"].size() == 5);
  for (const auto& r : t["rows"]) CHECK(std::abs(r[1].get<double>() - 1.0) < 1e-8);
}
