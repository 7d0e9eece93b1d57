#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "polariton/run_io.hpp"

namespace fs = std::filesystem;
using polariton::file_inventory;
using polariton::read_file;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = {}) {
  const fs::path capture = fs::temp_directory_path() / "polariton-cli-stdout.txt";
  const std::string cmd =
      env + " " + POLARITON_CLI + " " + args + " > " + capture.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  Run r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(capture)};
  fs::remove(capture);
  return r;
}

fs::path fresh(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("polariton-cli-" + name);
  fs::remove_all(dir);
  return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path path = fs::temp_directory_path() / ("polariton-cli-" + name + ".ini");
  std::ofstream(path) << text;
  return path;
}

const char* small_sweep = R"([grid]
N = 64
L = 8
[sweep]
alphas = 0, 0.1
[solver]
T = 1
)";

void check_manifest(const fs::path& dir) {
  const auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
  CHECK(m["files"].get<std::vector<std::string>>() == file_inventory(dir));
  CHECK_FALSE(fs::exists(dir / ".lock"));
}

}  // namespace

TEST_CASE("predict prints the scaling exponent") {
  const Run r = run("predict --alpha 0 --p 3 --model ep");
  CHECK(r.code == 0);
  CHECK(r.out.find("\n0,0.2,exact,ep,") != std::string::npos);

  const Run js = run("predict --alpha 0,0.5 --p 3 --model nls --json");
  CHECK(js.code == 0);
  const auto rows = nlohmann::json::parse(js.out);
  CHECK(rows[0]["beta"] == 1.0);
  CHECK(rows[1]["beta"].is_null());
  CHECK(rows[1]["regime"] == "any-positive");
}

TEST_CASE("usage errors") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("predict --json --csv").code == 2);
  CHECK(run("simulate --delta 0.5 --alpha 0.1").code == 2);
}

TEST_CASE("verify on defaults") {
  const fs::path dir = fresh("verify");
  const Run r = run("verify -o " + dir.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  check_manifest(dir);
  fs::remove_all(dir);
}

TEST_CASE("config errors exit with their own code") {
  const fs::path cfg = write_config("bad", "[physics]\np = 0.5\n");
  CHECK(run("sweep -c " + cfg.string() + " -o " + fresh("bad").string()).code == 3);
  fs::remove(cfg);
}

TEST_CASE("sweep writes outputs and reuses its cache") {
  const fs::path cfg = write_config("sweep", small_sweep);
  const fs::path dir = fresh("sweep");
  const Run first = run("sweep -c " + cfg.string() + " -o " + dir.string());
  CHECK(first.code == 0);
  for (const char* f : {"crossings.csv", "betas.csv", "summary.json", "manifest.json", "config.ini"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  CHECK(summary["complete"] == true);
  CHECK(summary["simulations_run"] == 7);
  check_manifest(dir);
  const std::string crossings = read_file(dir / "crossings.csv");

  const Run second = run("sweep -c " + cfg.string(), "POLARITON_OUTPUT_DIR=" + dir.string() + " POLARITON_WORKERS=2");
  CHECK(second.code == 0);
  const auto again = nlohmann::json::parse(read_file(dir / "summary.json"));
  CHECK(again["simulations_run"] == 0);
  CHECK(again["cache_hits"] == 7);
  CHECK(read_file(dir / "crossings.csv") == crossings);
  check_manifest(dir);
  fs::remove_all(dir);
  fs::remove(cfg);
}

TEST_CASE("short horizon is an incomplete sweep with partial outputs") {
  const fs::path cfg = write_config("short", "[grid]\nN = 64\nL = 8\n[solver]\nT = 0.2\n");
  const fs::path dir = fresh("short");
  CHECK(run("sweep -c " + cfg.string() + " -o " + dir.string()).code == 5);
  CHECK(fs::exists(dir / "crossings.csv"));
  CHECK(fs::exists(dir / "summary.json"));
  check_manifest(dir);
  fs::remove_all(dir);
  fs::remove(cfg);
}

TEST_CASE("a locked output directory is refused") {
  const fs::path dir = fresh("locked");
  fs::create_directories(dir);
  std::ofstream(dir / ".lock") << "1\n";
  CHECK(run("verify -o " + dir.string()).code == 6);
  fs::remove_all(dir);
}

TEST_CASE("simulate writes a trajectory with diagnostics") {
  const fs::path cfg = write_config("sim", "[grid]\nN = 64\nL = 8\n");
  const fs::path dir = fresh("sim");
  CHECK(run("simulate -c " + cfg.string() + " -o " + dir.string() + " --delta 0.5 -T 0.5").code == 0);
  const auto traj = polariton::parse_csv(read_file(dir / "trajectory.csv"));
  CHECK(traj.header == std::vector<std::string>{"t", "norm_phi", "norm_psi", "mass"});
  CHECK(traj.rows.size() == 51);
  const auto diag = nlohmann::json::parse(read_file(dir / "diagnostics.json"));
  CHECK(diag["mass_drift"].get<double>() < 1e-10);
  CHECK(diag["psi_over_ystar_max"].get<double>() > 0.0);
  CHECK(fs::exists(dir / "rho.csv"));
  check_manifest(dir);
  fs::remove_all(dir);
  fs::remove(cfg);
}

TEST_CASE("lemma table") {
  const Run r = run("lemma --p 3 --delta 0.5 --eta 0.01,0.1");
  CHECK(r.code == 0);
  const auto table = polariton::parse_csv(r.out);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[1][3] == doctest::Approx(0.51354352702015466).epsilon(1e-12));
}
