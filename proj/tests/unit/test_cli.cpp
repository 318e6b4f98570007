// End-to-end checks of the installed binary: exit codes and report shape.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(OCLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string scenario(const std::string& name) {
  return std::string(OCLAB_SCENARIO_DIR) + "/" + name;
}

int count_data_rows(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#' && line.rfind("scenario,", 0) != 0) ++rows;
  return rows;
}

} // namespace

TEST_CASE("shipped verification scenario exits 0 with a 12-row report") {
  const auto r = run_cli("run --scenario " + scenario("verify_ex_first.scn") + " --out -");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("#schema=1\n", 0) == 0);
  CHECK(count_data_rows(r.out) == 12);
}

TEST_CASE("the intended-failure demo exits 1") {
  const auto r = run_cli("run --scenario " + scenario("mismatch_demo.scn") + " --out -");
  CHECK(r.exit_code == 1);
}

TEST_CASE("configuration problems exit 2 with a field diagnostic") {
  const auto tmp = fs::temp_directory_path() / "oclab_bad_family.scn";
  {
    std::ofstream out(tmp);
    out << R"({"scenarios":[{"name":"x","pipeline":"verify","family":"exfirst"}]})";
  }
  const std::string cmd = std::string(OCLAB_CLI_PATH) + " run --scenario " + tmp.string() +
                          " --out - 2>&1 >/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string err;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) err.append(buf, n);
  const int status = pclose(pipe);
  CHECK(WEXITSTATUS(status) == 2);
  CHECK(err.find("scenarios[0].family") != std::string::npos);
  fs::remove(tmp);
}

TEST_CASE("missing scenario file exits 2") {
  const auto r = run_cli("run --scenario /nonexistent/path.scn --out -");
  CHECK(r.exit_code == 2);
}

TEST_CASE("custom families run through the full stack") {
  const auto r = run_cli("run --scenario " + scenario("custom_family_demo.scn") + " --out -");
  CHECK(r.exit_code == 0);
  CHECK(count_data_rows(r.out) == 12);
}

TEST_CASE("the trace file carries the per-k samples") {
  const auto tmp = fs::temp_directory_path();
  const std::string out = (tmp / "oclab_cli_trace.csv").string();
  const auto r = run_cli("run --scenario " + scenario("verify_ex_first.scn") + " --out " + out +
                         " --k-max 10 --trace");
  CHECK(r.exit_code == 0);
  std::ifstream trace(out + ".trace.csv");
  REQUIRE(trace.good());
  std::stringstream ss;
  ss << trace.rdbuf();
  CHECK(count_data_rows(ss.str()) == 12 * 7); // 12 members, k = 2^4..2^10
  fs::remove(out);
  fs::remove(out + ".trace.csv");
}
