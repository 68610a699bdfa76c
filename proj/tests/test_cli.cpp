#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "support.hpp"

using nlohmann::json;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
};

Run run(const std::string& args) {
  Run r;
  const std::string cmd = std::string(OPENEYE_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::size_t count_lines(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

}  // namespace

TEST_CASE("cli end to end on fixtures") {
  testing::TempDir dir("cli");
  const std::string root = dir.path.string();
  const auto fx = run("fixtures --out " + root + " --real 12 --fake 12 --seed 3");
  REQUIRE(fx.exit_code == 0);
  CHECK(fx.out.find("calibrated tau") != std::string::npos);
  const std::string manifest = root + "/manifest.jsonl";
  const std::string config = root + "/openeye.conf";

  SUBCASE("ingest dry run prints the report") {
    const auto r = run("ingest --manifest " + manifest);
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("added") == 24);
    CHECK(j.at("errors").empty());
    CHECK(j.at("validation").at("valid") == true);
  }

  SUBCASE("analyze writes one scored line per image") {
    const auto r = run("analyze --manifest " + manifest + " --out " + root + "/scores.jsonl");
    REQUIRE(r.exit_code == 0);
    const std::string text = testing::read_text(dir / "scores.jsonl");
    CHECK(count_lines(text) == 24);
    std::istringstream in(text);
    std::string line;
    std::string prev;
    while (std::getline(in, line)) {
      const json j = json::parse(line);
      CHECK(j.at("image_id").get<std::string>() > prev);
      prev = j.at("image_id");
      CHECK(j.at("aggregate").is_number());
      CHECK(j.at("left").contains("biou"));
    }
  }

  SUBCASE("simulate from a manifest") {
    const auto r = run("simulate --manifest " + manifest + " --sessions 3 --seed 1");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("sessions").size() == 3);
    CHECK(j.at("aggregate").at("n_sessions") == 3);
    CHECK(j.at("aggregate").at("stage3").at("accuracy").at("mean").get<double>() >= 0.9);
    const auto again = run("simulate --manifest " + manifest + " --sessions 3 --seed 1");
    CHECK(json::parse(again.out).at("aggregate") == j.at("aggregate"));
  }

  SUBCASE("ingest into a deployment, simulate and export") {
    const auto ing = run("ingest --manifest " + manifest + " --config " + config);
    REQUIRE(ing.exit_code == 0);
    CHECK(std::filesystem::exists(dir.path / "data" / "pool" / "index.jsonl"));
    const auto sim = run("simulate --config " + config + " --sessions 2 --seed 4");
    REQUIRE(sim.exit_code == 0);
    CHECK(json::parse(sim.out).at("aggregate").at("n_sessions") == 2);
    const auto ex = run("export --config " + config + " --out " + root + "/export.jsonl");
    REQUIRE(ex.exit_code == 0);
    CHECK(testing::read_text(dir / "export.jsonl").empty());
  }

  SUBCASE("failures exit nonzero") {
    CHECK(run("ingest --manifest " + root + "/missing.jsonl").exit_code != 0);
    CHECK(run("export --config " + root + "/missing.conf --out " + root + "/x").exit_code != 0);
    CHECK(run("simulate --sessions 2").exit_code != 0);
    CHECK(run("bogus").exit_code != 0);
  }
}

TEST_CASE("serve without a config is a usage error") {
  const auto r = run("serve --port 0");
  CHECK(r.exit_code != 0);
  const std::string cmd = std::string(OPENEYE_CLI) + " serve 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  std::array<char, 1024> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) text.append(buf.data(), n);
  ::pclose(pipe);
  CHECK(text.find("--config") != std::string::npos);
}
