#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "spdekit/cli.hpp"
#include "spdekit/io.hpp"

using namespace spdekit;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spdekit_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate then estimate") {
  const auto dir = scratch("h1");
  auto sim = run({"simulate", "--model", "heat", "--d", "1", "--L", "50", "--theta0", "1.0",
                  "--sigma", "1.0", "--T", "5", "--dt", "1e-4", "--N", "256", "--observe", "64",
                  "--seed", "7", "--out", dir.string()});
  INFO(sim.err);
  REQUIRE(sim.code == 0);
  CHECK(fs::exists(dir / "modes.bin"));
  CHECK(fs::exists(dir / "modes_manifest.txt"));
  CHECK(fs::exists(dir / "run_manifest.json"));
  CHECK(fs::exists(dir / "run_config.cfg"));

  auto est = run({"estimate", "--in", dir.string(), "--unknowns", "diffusion", "--N", "64"});
  INFO(est.err);
  REQUIRE(est.code == 0);
  const auto j = nlohmann::json::parse(est.out);
  const double theta = j["theta_hat"][0];
  CHECK(theta == doctest::Approx(1.0).epsilon(0.15));
  CHECK(j["ci_low"][0].get<double>() < theta);
  CHECK(j["ci_high"][0].get<double>() > theta);
  CHECK(j["N"] == 64);

  // Re-running from the recorded configuration reproduces the data.
  const auto again = scratch("h1_again");
  auto rerun = run({"simulate", "--config", (dir / "run_config.cfg").string(), "--out", again.string()});
  INFO(rerun.err);
  REQUIRE(rerun.code == 0);
  CHECK(slurp(dir / "modes.bin") == slurp(again / "modes.bin"));
}

TEST_CASE("rates from a config file") {
  const auto dir = scratch("rates");
  fs::create_directories(dir);
  std::ofstream(dir / "rates_d1.cfg") << "# small study\nmodel=linear\nd=1\nL=50\ntheta0=1\n"
                                         "theta1=0.5\nknown=poly1:0.5\nT=0.5\ndt=1e-3\n"
                                         "N-sim=32\nN-list=4,8,16\nreplicates=20\nthreads=1\n";
  auto r = run({"rates", "--config", (dir / "rates_d1.cfg").string(), "--out", (dir / "out").string()});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "out" / "rates.csv");
  CHECK(csv.find("slope_fit") != std::string::npos);
  CHECK(csv.find("\ndiffusion,16,") != std::string::npos);
}

TEST_CASE("usage errors exit with 1") {
  auto unknown = run({"estimate", "--in", "x", "--bogus-flag", "3"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("--bogus-flag") != std::string::npos);

  auto missing = run({"estimate", "--in", scratch("nowhere").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("nowhere") != std::string::npos);

  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"simulate", "--help"}).code == 0);
}

TEST_CASE("manifest version mismatch exits with 1") {
  const auto dir = scratch("version");
  REQUIRE(run({"simulate", "--T", "0.01", "--dt", "1e-3", "--N", "4", "--out", dir.string()}).code == 0);
  std::string text = slurp(dir / "modes_manifest.txt");
  text.replace(text.find("format_version=1"), 16, "format_version=9");
  std::ofstream(dir / "modes_manifest.txt") << text;
  auto r = run({"estimate", "--in", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("version mismatch") != std::string::npos);
}

TEST_CASE("degenerate data exits with 2") {
  const auto dir = scratch("zeros");
  ModeTrajectory t;
  t.basis = build_basis(Domain({1.0}), 4, true);
  t.times = {0.0, 0.1, 0.2};
  t.coeffs = RowMatrix::Zero(3, 4);
  save_modes(t, dir, {0.2, 0, "zeros"});
  auto r = run({"estimate", "--in", dir.string()});
  CHECK(r.code == 2);
  CHECK(run({"noise-id", "--in", dir.string()}).code == 2);
}

}  // TEST_SUITE
