// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "acmead/cli.hpp"
#include "acmead/core.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = acmead::cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("acmead_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

// synth -> fit, shared by most cases.
void prepare(const Scratch& s, const std::string& kind = "iforest") {
  REQUIRE(run({"synth", "--n", "600", "--anomalies", "12", "--dims", "5", "--root", "2",
               "--shift", "6", "--seed", "4", "--out", s("data.csv")})
              .code == 0);
  REQUIRE(run({"fit", "--input", s("data.csv"), "--model", kind, "--contamination", "0.02",
               "--seed", "9", "--out", s("model.json")})
              .code == 0);
}

}  // namespace

TEST_CASE("synth to stdout matches synth to file") {
  Scratch s;
  const auto a = run({"synth", "--n", "20", "--anomalies", "2", "--dims", "3", "--root", "0",
                      "--shift", "4", "--seed", "1", "--out", "-"});
  REQUIRE(a.code == 0);
  REQUIRE(run({"synth", "--n", "20", "--anomalies", "2", "--dims", "3", "--root", "0", "--shift",
               "4", "--seed", "1", "--out", s("d.csv")})
              .code == 0);
  CHECK(a.out == slurp(s("d.csv")));
  CHECK(a.out.rfind("f0,f1,f2,label\n", 0) == 0);
}

TEST_CASE("fit and score") {
  Scratch s;
  prepare(s);
  const auto model = nlohmann::json::parse(slurp(s("model.json")));
  CHECK(model["kind"] == "iforest");
  CHECK(model["contamination"] == 0.02);
  REQUIRE(run({"score", "--model", s("model.json"), "--input", s("data.csv"), "--out",
               s("scores.csv")})
              .code == 0);
  const auto scores = slurp(s("scores.csv"));
  CHECK(scores.rfind("score,anomalous\n", 0) == 0);
  CHECK(std::count(scores.begin(), scores.end(), '\n') == 613);
}

TEST_CASE("explain writes JSON and SVG with defaults") {
  Scratch s;
  prepare(s);
  REQUIRE(run({"explain", "--model", s("model.json"), "--input", s("data.csv"), "--row", "605",
               "--out", s("e.json"), "--svg", s("e.svg")})
              .code == 0);
  const auto doc = nlohmann::json::parse(slurp(s("e.json")));
  CHECK(doc["method"] == "acme_ad");
  CHECK(doc["point_id"] == 605);
  CHECK(doc["weights"]["D"] == 0.3);
  CHECK(doc["weights"]["R"] == 0.2);
  CHECK(doc["features"].size() == 5);
  CHECK(doc["features"][0]["curve"].size() == 51);
  CHECK(slurp(s("e.svg")).find("<svg") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across runs and inputs are untouched") {
  Scratch s;
  prepare(s);
  const auto data_before = slurp(s("data.csv"));
  const auto model_before = slurp(s("model.json"));
  for (const char* name : {"a", "b"}) {
    const std::string n = name;
    REQUIRE(run({"explain", "--model", s("model.json"), "--input", s("data.csv"), "--row", "601",
                 "--out", s(n + ".json"), "--svg", s(n + ".svg"), "--threads", "1"})
                .code == 0);
    REQUIRE(run({"overall", "--model", s("model.json"), "--input", s("data.csv"), "--out",
                 s(n + "_o.json"), "--svg", s(n + "_o.svg")})
                .code == 0);
  }
  CHECK(slurp(s("a.json")) == slurp(s("b.json")));
  CHECK(slurp(s("a.svg")) == slurp(s("b.svg")));
  CHECK(slurp(s("a_o.json")) == slurp(s("b_o.json")));
  CHECK(slurp(s("a_o.svg")) == slurp(s("b_o.svg")));
  CHECK(slurp(s("data.csv")) == data_before);
  CHECK(slurp(s("model.json")) == model_before);
}

TEST_CASE("overall points at the injected root cause") {
  Scratch s;
  prepare(s);
  REQUIRE(run({"overall", "--model", s("model.json"), "--input", s("data.csv"), "--out",
               s("o.json"), "--no-merge"})
              .code == 0);
  const auto doc = nlohmann::json::parse(slurp(s("o.json")));
  CHECK(doc["positions"].size() == 5);
  const auto& features = doc["features"];
  std::size_t best = 0;
  for (std::size_t j = 1; j < features.size(); ++j)
    if (doc["matrix"][j][0].get<double>() > doc["matrix"][best][0].get<double>()) best = j;
  CHECK(features[best] == "f2");
}

TEST_CASE("overall with nothing above the threshold fails") {
  Scratch s;
  prepare(s);
  // Threshold pushed above every possible score.
  auto model = nlohmann::json::parse(slurp(s("model.json")));
  model["threshold"] = 2.0;
  std::ofstream(s("high.json")) << model.dump();
  const auto r = run({"overall", "--model", s("high.json"), "--input", s("data.csv"), "--out",
                      s("o.json")});
  CHECK(r.code != 0);
  CHECK(r.err.find("no anomalies detected") != std::string::npos);
}

TEST_CASE("shap subcommand") {
  Scratch s;
  prepare(s, "loda");
  REQUIRE(run({"shap", "--model", s("model.json"), "--input", s("data.csv"), "--row", "607",
               "--background-frac", "0.05", "--seed", "3", "--out", s("k.json")})
              .code == 0);
  const auto doc = nlohmann::json::parse(slurp(s("k.json")));
  CHECK(doc["method"] == "kernelshap");
  CHECK(doc["background_size"] == 30);
  CHECK(doc["exact"] == true);
  double total = doc["phi0"].get<double>();
  for (const auto& p : doc["phi"]) total += p.get<double>();
  CHECK(total == doctest::Approx(doc["score"].get<double>()).epsilon(1e-9));
}

TEST_CASE("bench subcommand writes CSV and prints a table") {
  Scratch s;
  const auto r = run({"bench", "--suite", "dimension", "--dim-values", "2,4", "--n", "200",
                      "--quantiles", "5", "--work", "10", "--seed", "1", "--out", s("b.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Elapsed time") != std::string::npos);
  const auto csv = slurp(s("b.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("exit codes") {
  Scratch s;
  prepare(s);
  CHECK(run({}).code == 1);
  CHECK(run({"fit", "--bogus"}).code == 1);
  CHECK(run({"synth", "--n", "5", "--anomalies", "1", "--dims", "2", "--root", "0", "--shift",
             "1", "--out", "-"})
            .code == 1);
  CHECK(run({"explain", "--model", s("model.json"), "--input", s("data.csv"), "--row", "9999",
             "--out", s("x.json")})
            .code == 1);
  CHECK(run({"explain", "--model", s("model.json"), "--input", s("data.csv"), "--row", "1",
             "--weights", "1,1,1,1", "--out", s("x.json")})
            .code == 1);
  CHECK(run({"score", "--model", s("model.json"), "--input", s("missing.csv"), "--out", "-"})
            .code == 2);
  std::ofstream(s("bad.csv")) << "a,b\n1,oops\n";
  const auto bad = run({"fit", "--input", s("bad.csv"), "--model", "iforest", "--seed", "1", "--out", s("m.json")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("row") != std::string::npos);
  std::ofstream(s("broken.json")) << "{\"format\": \"acmead-model\"}";
  CHECK(run({"score", "--model", s("broken.json"), "--input", s("data.csv"), "--out", "-"})
            .code == 3);
  std::ofstream(s("other.csv")) << "x,y\n1,2\n";
  CHECK(run({"score", "--model", s("model.json"), "--input", s("other.csv"), "--out", "-"})
            .code == 2);
}

TEST_CASE("seed from the environment") {
  ::setenv("ACMEAD_SEED", "5", 1);
  const auto a = run({"synth", "--n", "10", "--anomalies", "1", "--dims", "2", "--root", "0",
                      "--shift", "1", "--out", "-"});
  ::unsetenv("ACMEAD_SEED");
  const auto b = run({"synth", "--n", "10", "--anomalies", "1", "--dims", "2", "--root", "0",
                      "--shift", "1", "--seed", "5", "--out", "-"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("installed binary runs the pipeline end to end") {
  Scratch s;
  const std::string exe = ACMEAD_CLI_PATH;
  const auto cmd = [&](const std::string& rest) {
    return std::system((exe + " " + rest + " > " + s("stdout.txt") + " 2>&1").c_str());
  };
  REQUIRE(cmd("synth --n 400 --anomalies 8 --dims 4 --root 1 --shift 6 --seed 2 --out " +
              s("d.csv")) == 0);
  REQUIRE(cmd("fit --input " + s("d.csv") + " --model iforest --contamination 0.02 --seed 2 --out " +
              s("m.json")) == 0);
  REQUIRE(cmd("overall --model " + s("m.json") + " --input " + s("d.csv") + " --out " +
              s("o.json") + " --no-merge") == 0);
  const auto doc = nlohmann::json::parse(slurp(s("o.json")));
  std::size_t best = 0;
  for (std::size_t j = 1; j < doc["features"].size(); ++j)
    if (doc["matrix"][j][0].get<double>() > doc["matrix"][best][0].get<double>()) best = j;
  CHECK(doc["features"][best] == "f1");
  CHECK(cmd("explain --model " + s("m.json")) != 0);
  CHECK(slurp(s("stdout.txt")).rfind("error: ", 0) == 0);
}
