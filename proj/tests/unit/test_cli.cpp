#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "mgtv/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result mgtv_run(std::vector<std::string> args) {
  args.insert(args.begin(), "mgtv");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = mgtv::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string &name) {
  return (fs::path(MGTV_DATA_DIR) / name).string();
}

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("mgtv_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("help") {
  CHECK(mgtv_run({"--help"}).code == 0);
  for (const char *sub : {"validate", "tv", "flow", "oracle", "compare", "analyze"})
    CHECK(mgtv_run({sub, "--help"}).code == 0);
  CHECK(mgtv_run({"oracle", "star", "--help"}).code == 0);
  CHECK(mgtv_run({}).code == 2);
  CHECK(mgtv_run({"bogus"}).code == 2);
}

TEST_CASE("validate") {
  const auto r = mgtv_run({"validate", "--graph", data("star.json")});
  CHECK(r.code == 0);
  CHECK(r.out.find("interior: v2 (degree 3)") != std::string::npos);
  CHECK(r.out.find("boundary: v1 v3 v4") != std::string::npos);
  CHECK(mgtv_run({"validate", "--graph", data("interval.json")}).out.find("interior: none") !=
        std::string::npos);
  const auto loop = mgtv_run({"validate", "--graph", data("loop.json")});
  CHECK(loop.code == 2);
  CHECK(loop.err.find("loop") != std::string::npos);
  const auto missing = mgtv_run({"validate", "--graph", data("missing.json")});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("cannot open") != std::string::npos);
}

TEST_CASE("tv") {
  const auto r = mgtv_run({"tv", "--graph", data("star.json"), "--datum", data("star_jump.json")});
  CHECK(r.code == 0);
  CHECK(r.out.find("du_mass: 0\n") != std::string::npos);
  CHECK(r.out.find("jv: 2.6666666666666665\n") != std::string::npos);
  CHECK(r.out.find("tv: 2\n") != std::string::npos);

  const auto lin = mgtv_run({"tv", "--graph", data("path4.json"), "--datum", data("path4_datum.json")});
  CHECK(lin.out.find("tv == du_mass + jv: true") != std::string::npos);

  const fs::path dir = scratch("tv");
  std::ofstream(dir / "c.json")
      << R"({"edges": [{"edge": 0, "pieces": [{"from": 0, "to": 2, "value": 3}]},
             {"edge": 1, "pieces": [{"from": 0, "to": 1, "value": 3}]},
             {"edge": 2, "pieces": [{"from": 0, "to": 1, "value": 3}]}]})";
  const auto c = mgtv_run({"tv", "--graph", data("star.json"), "--datum", (dir / "c.json").string()});
  CHECK(c.out.find("du_mass: 0\njv: 0\ntv: 0\n") != std::string::npos);

  CHECK(mgtv_run({"tv", "--graph", data("star.json"), "--datum", data("interval_step.json")}).code == 2);
}

TEST_CASE("flow, oracle, compare, analyze") {
  const fs::path dir = scratch("pipeline");
  const std::string run = (dir / "run").string();
  const auto f = mgtv_run({"flow", "--graph", data("interval.json"), "--datum",
                           data("interval_step.json"), "--out", run, "--h-max", "0.01",
                           "--tau", "0.01", "--until-extinction"});
  REQUIRE(f.code == 0);
  CHECK(f.out.find("extinction_time: 0.21") != std::string::npos);
  const std::string traj = (fs::path(run) / "trajectory.csv").string();
  CHECK(fs::exists(fs::path(run) / "diagnostics.csv"));

  const std::string oracle_csv = (dir / "oracle.csv").string();
  const auto o = mgtv_run({"oracle", "neumann1", "--L", "1", "--a", "0.3", "--k", "1",
                           "--times-from", traj, "--out", oracle_csv});
  REQUIRE(o.code == 0);
  const std::string text = slurp(oracle_csv);
  CHECK(text.find("# T_ex=0.21\n") != std::string::npos);
  CHECK(text.find("# T_ex_exact=21/100\n") != std::string::npos);

  const auto c = mgtv_run({"compare", "--solver", traj, "--oracle", oracle_csv, "--graph",
                           data("interval.json")});
  CHECK(c.code == 0);
  const auto self = mgtv_run({"compare", "--solver", traj, "--oracle", traj, "--graph",
                              data("interval.json")});
  CHECK(self.out.find("max_linf: 0\n") != std::string::npos);
  CHECK(mgtv_run({"compare", "--solver", traj, "--oracle", oracle_csv, "--graph",
                  data("star.json")}).code == 2);

  const auto a = mgtv_run({"analyze", "--graph", data("interval.json"), "--datum",
                           data("interval_step.json"), "--trajectory", traj});
  CHECK(a.code == 0);
  CHECK(a.out.find("bounds_hold: yes") != std::string::npos);
  const auto j = mgtv_run({"analyze", "--graph", data("interval.json"), "--datum",
                           data("interval_step.json"), "--trajectory", traj, "--json"});
  CHECK(j.code == 0);
  CHECK(j.out.find("\"measured_extinction\": 0.21") != std::string::npos);

  // determinism
  const std::string run2 = (dir / "run2").string();
  mgtv_run({"flow", "--graph", data("interval.json"), "--datum", data("interval_step.json"),
            "--out", run2, "--h-max", "0.01", "--tau", "0.01", "--until-extinction"});
  CHECK(slurp(traj) == slurp(fs::path(run2) / "trajectory.csv"));

  // a truncated run never extinguishes
  const std::string part = (dir / "part").string();
  mgtv_run({"flow", "--graph", data("interval.json"), "--datum", data("interval_step.json"),
            "--out", part, "--h-max", "0.01", "--tau", "0.01", "--t-end", "0.1"});
  CHECK(mgtv_run({"analyze", "--graph", data("interval.json"), "--datum",
                  data("interval_step.json"), "--trajectory",
                  (fs::path(part) / "trajectory.csv").string()}).code == 4);
  // comparing against a far-off reference exceeds the tolerance
  const std::string off = (dir / "off.csv").string();
  mgtv_run({"oracle", "neumann1", "--L", "1", "--a", "0.6", "--k", "1", "--times-from", traj,
            "--out", off});
  CHECK(mgtv_run({"compare", "--solver", traj, "--oracle", off, "--graph",
                  data("interval.json")}).code == 1);
}

TEST_CASE("flow options") {
  const fs::path dir = scratch("flow");
  const auto zero = mgtv_run({"flow", "--graph", data("star.json"), "--datum",
                              data("star_step.json"), "--out", (dir / "z").string(),
                              "--h-max", "0.1", "--t-end", "0"});
  CHECK(zero.code == 0);
  CHECK(zero.out.find("steps: 0") != std::string::npos);

  const auto dec = mgtv_run({"flow", "--graph", data("star.json"), "--datum",
                             data("star_step.json"), "--out", (dir / "d").string(),
                             "--h-max", "0.01", "--tau", "0.01", "--t-end", "2",
                             "--mode", "decoupled"});
  CHECK(dec.code == 0);
  CHECK(dec.out.find("extinction_time: not reached") != std::string::npos);

  CHECK(mgtv_run({"flow", "--graph", data("star.json"), "--datum", data("star_step.json"),
                  "--out", (dir / "x").string()}).code == 2);
  CHECK(mgtv_run({"flow", "--graph", data("star.json"), "--datum", data("star_step.json"),
                  "--out", (dir / "x").string(), "--t-end", "1", "--mode", "sideways"})
            .code == 2);
  CHECK(mgtv_run({"flow", "--graph", data("star.json"), "--datum", data("star_step.json"),
                  "--out", (dir / "x").string(), "--t-end", "1", "--tau", "-1"})
            .code == 2);
  CHECK(mgtv_run({"flow", "--graph", data("triangle.json"), "--datum",
                  data("triangle_datum.json"), "--out", (dir / "t").string(), "--h-max",
                  "0.05", "--tau", "0.05", "--t-end", "1", "--max-iter", "10"})
            .code == 3);
  CHECK(mgtv_run({"flow", "--graph", data("triangle.json"), "--datum",
                  data("triangle_datum.json"), "--out", (dir / "t").string(), "--t-end",
                  "1", "--method", "exact"})
            .code == 2);
}

TEST_CASE("oracle") {
  const auto n1 = mgtv_run({"oracle", "neumann1", "--L", "1", "--a", "0.3", "--k", "1"});
  CHECK(n1.code == 0);
  CHECK(n1.out.find("# T_ex=0.21\n") != std::string::npos);
  const auto star = mgtv_run({"oracle", "star", "--l1", "2", "--l", "1", "--a", "0.5",
                              "--k", "1", "--times", "0,0.3,0.75"});
  CHECK(star.out.find("# phase_ends=0.3;0.75\n") != std::string::npos);
  CHECK(star.out.find("# final_exact=3/8\n") != std::string::npos);
  const auto q = mgtv_run({"oracle", "neumann1", "--L", "1", "--a", "3/10"});
  CHECK(q.out.find("# T_ex_exact=21/100\n") != std::string::npos);

  CHECK(mgtv_run({"oracle", "neumann4", "--L", "1", "--a", "0.2", "--b", "0.3"}).code == 2);
  CHECK(mgtv_run({"oracle", "nonesuch", "--L", "1"}).code == 2);
  CHECK(mgtv_run({"oracle", "neumann1", "--L", "1", "--a", "x"}).code == 2);
  CHECK(mgtv_run({"oracle", "neumann1", "--L", "1"}).code == 2);

  const fs::path dir = scratch("oracle");
  const auto files = mgtv_run({"oracle", "path3", "--l1", "2", "--l2", "1", "--a", "0.5",
                               "--graph-out", (dir / "g.json").string(), "--datum-out",
                               (dir / "d.json").string(), "--out",
                               (dir / "o.csv").string()});
  CHECK(files.code == 0);
  const auto tv = mgtv_run({"tv", "--graph", (dir / "g.json").string(), "--datum",
                            (dir / "d.json").string()});
  CHECK(tv.code == 0);
  CHECK(tv.out.find("tv: 2\n") != std::string::npos);
}
