// Copyright 2026 The evspot Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "evspot/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kFixtures = EVSPOT_FIXTURE_DIR;

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = evspot::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("evspot_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("validate exit codes") {
  const auto ok = run({"validate", fixture("valid.events")});
  CHECK(ok.code == evspot::kExitOk);
  CHECK(ok.out == "ok\n");

  const auto clash = run({"validate", fixture("clash.events")});
  CHECK(clash.code == evspot::kExitViolations);
  CHECK(clash.out.find("rule=exclusion_clash") != std::string::npos);
  CHECK(std::count(clash.out.begin(), clash.out.end(), '\n') == 1);

  CHECK(run({"validate", fixture("missing.events")}).code == evspot::kExitInputError);
  CHECK(run({"validate", "--taxonomy", fixture("cyclic.taxonomy"), fixture("valid.events")}).code ==
        evspot::kExitInputError);
  CHECK(run({"frobnicate"}).code == evspot::kExitInputError);
  CHECK(run({"eval", "--pred", fixture("valid.events")}).code == evspot::kExitInputError);
}

TEST_CASE("eval prints a table and writes a manifest") {
  const auto dir = scratch("eval");
  const auto r = run({"eval", "--pred", fixture("shifted.events"), "--ref", fixture("valid.events"), "--tol",
                      fixture("tolerance.json"), "--out", dir.string()});
  REQUIRE(r.code == evspot::kExitOk);
  CHECK(r.out.find("ball_reception") != std::string::npos);
  CHECK(r.out.find("temporal IoU active play") != std::string::npos);
  CHECK(fs::exists(dir / "report.txt"));
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report.contains("categories"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["inputs"].size() == 3);
  CHECK(manifest["taxonomy"]["sport"] == "soccer");
  CHECK(manifest["tolerance"]["windows"]["ball_reception"] == 1.0);
  CHECK(manifest["outputs"].size() == 2);

  const auto js = run({"eval", "--pred", fixture("valid.events"), "--ref", fixture("valid.events"), "--format",
                       "json", "--categories", "ball_reception"});
  REQUIRE(js.code == evspot::kExitOk);
  const auto doc = nlohmann::json::parse(js.out);
  CHECK(doc["categories"].size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("agree and timeline") {
  const auto a = run({"agree", fixture("valid.events"), fixture("shifted.events"), "--format", "json"});
  REQUIRE(a.code == evspot::kExitOk);
  CHECK(nlohmann::json::parse(a.out).contains("annotators"));

  const auto t = run({"timeline", fixture("valid.events"), fixture("shifted.events"), "--format", "json"});
  REQUIRE(t.code == evspot::kExitOk);
  const auto tl = nlohmann::json::parse(t.out);
  REQUIRE(tl["lanes"].size() == 2);
  CHECK(tl["lanes"][0]["annotator"] == "ann");
  CHECK(tl["lanes"][1]["active"].size() == 2);
  CHECK(run({"timeline", fixture("valid.events")}).out.rfind("<svg", 0) == 0);
}

TEST_CASE("spot reads scores and a config") {
  const auto r = run({"spot", "--scores", fixture("scores.csv"), "--config", fixture("spotter.json")});
  REQUIRE(r.code == evspot::kExitOk);
  CHECK(r.out.find("t_seconds=0.300 category=ball_reception") != std::string::npos);
  CHECK(r.out.find("t_seconds=0.900 category=ball_reception") != std::string::npos);
  CHECK(run({"spot", "--scores", fixture("gap_scores.csv"), "--config", fixture("spotter.json")}).code ==
        evspot::kExitInputError);
}

TEST_CASE("synth writes reproducible files") {
  const auto d1 = scratch("synth1");
  const auto d2 = scratch("synth2");
  for (const auto& d : {d1, d2}) {
    REQUIRE(run({"synth", "--annotators", "2", "--stream", "spike", "--out", d.string(), "--seed", "5"}).code ==
            evspot::kExitOk);
  }
  for (const char* f : {"match.events", "annotator1.events", "annotator2.events", "scores.csv"}) {
    CHECK(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  CHECK(nlohmann::json::parse(slurp(d1 / "manifest.json"))["seed"] == 5);
  CHECK(run({"validate", (d1 / "match.events").string()}).code == evspot::kExitOk);
  CHECK(run({"synth", "--annotators", "2"}).code == evspot::kExitInputError);

  const auto demo = run({"synth", "--bias-demo", "2"});
  CHECK(demo.code == evspot::kExitOk);
  CHECK(demo.out.find("nn_precision=100.0") != std::string::npos);
  fs::remove_all(d1);
  fs::remove_all(d2);
}
