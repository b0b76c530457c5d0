#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "adatag/io.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(ADATAG_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("label, embed, train, extract and eval end to end") {
  testing::TempDir dir("cli");
  const auto data = dir.path / "data";
  const std::string spec = std::string(ADATAG_CONFIGS) + "/synth_skin_color.json";
  REQUIRE(run("synth --spec " + q(spec) + " --seed 5 --out " + q(data)).status == 0);
  REQUIRE(run("label --products " + q(data / "products.jsonl") + " --vocab " + q(data / "vocab.json") +
              " --out " + q(data / "labeled.jsonl") + " --report " + q(data / "coverage.json"))
              .status == 0);
  const auto coverage = nlohmann::json::parse(adatag::io::read_file(data / "coverage.json"));
  CHECK(coverage["examples"] == 180);
  REQUIRE(run("embed --labeled " + q(data / "labeled.jsonl") + " --splits " + q(data / "splits.json") +
              " --vocab " + q(data / "vocab.json") + " --vectors " + q(data / "vectors.txt") + " --out " +
              q(data / "table.jsonl"))
              .status == 0);

  const std::string train_args = "train --config adatag_default --labeled " + q(data / "labeled.jsonl") +
                                 " --splits " + q(data / "splits.json") + " --vocab " +
                                 q(data / "vocab.json") + " --table " + q(data / "table.jsonl") +
                                 " --vectors " + q(data / "vectors.txt") +
                                 " --d-h 8 --max-epochs 3 --setting title --seed 7 --out ";
  const auto r1 = run(train_args + q(dir.path / "run1" / "model"));
  REQUIRE(r1.status == 0);
  REQUIRE(run(train_args + q(dir.path / "run2" / "model") + " --threads 2").status == 0);
  CHECK(adatag::io::read_file(dir.path / "run1" / "model.bin") ==
        adatag::io::read_file(dir.path / "run2" / "model.bin"));
  auto manifest = [&](const char* run) {
    auto j = nlohmann::json::parse(adatag::io::read_file(dir.path / run / "model.json"));
    j["config"].erase("threads");
    return j;
  };
  CHECK(manifest("run1") == manifest("run2"));
  const auto report = nlohmann::json::parse(r1.out);
  CHECK(report["runs"][0]["epochs"].size() == 3);

  const auto ex = run("extract --checkpoint " + q(dir.path / "run1" / "model") +
                      " --attr SkinType,Color --text 'Night Cream for Dry Skin'");
  REQUIRE(ex.status == 0);
  const auto values = nlohmann::json::parse(ex.out);
  CHECK(values.contains("SkinType"));
  CHECK(values["Color"].is_array());

  const auto ev = run("eval --checkpoint " + q(dir.path / "run1" / "model") + " --labeled " +
                      q(data / "labeled.jsonl") + " --splits " + q(data / "splits.json") +
                      " --stratify 1000 --report " + q(dir.path / "metrics.json") + " --predictions " +
                      q(dir.path / "pred.jsonl"));
  REQUIRE(ev.status == 0);
  CHECK(ev.out.find("macro") != std::string::npos);
  const auto metrics = nlohmann::json::parse(adatag::io::read_file(dir.path / "metrics.json"));
  CHECK(metrics["high_resource"]["macro"] == "n/a");
  CHECK(fs::exists(dir.path / "pred.jsonl"));

  const auto pc = run("param-count --checkpoint " + q(dir.path / "run1" / "model") + " --json");
  REQUIRE(pc.status == 0);
  CHECK(nlohmann::json::parse(pc.out)["groups"].contains("hyper"));
}

TEST_CASE("parameter accounting from presets") {
  const auto r = run("param-count --config adatag_default");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("hyper.W_hyper_w") != std::string::npos);
  CHECK(r.out.find("1228800") != std::string::npos);
  const auto n = run("param-count --config n_tag_sets_default");
  REQUIRE(n.status == 0);
  CHECK(n.out.find("(3N+1)^2 = 1369") != std::string::npos);
  CHECK(n.out.find("9N^2 approximation = 1296") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run("").status == 1);
  CHECK(run("frobnicate").status == 1);
  CHECK(run("param-count --bogus").status == 1);
  CHECK(run("param-count --config /nonexistent.cfg").status == 2);
  CHECK(run("extract --checkpoint /nonexistent/model --text hi").status == 2);
  CHECK(run("--help").status == 0);
}

TEST_CASE("divergence exits with the numerical status and writes no checkpoint") {
  testing::TempDir dir("cli_nan");
  const auto data = dir.path / "data";
  const std::string spec = std::string(ADATAG_CONFIGS) + "/synth_skin_color.json";
  REQUIRE(run("synth --spec " + q(spec) + " --out " + q(data)).status == 0);
  REQUIRE(run("label --products " + q(data / "products.jsonl") + " --vocab " + q(data / "vocab.json") +
              " --out " + q(data / "labeled.jsonl"))
              .status == 0);
  const auto r = run("train --config multicrf_default --labeled " + q(data / "labeled.jsonl") + " --splits " +
                     q(data / "splits.json") + " --vocab " + q(data / "vocab.json") +
                     " --d-h 8 --max-epochs 3 --lr 1e300 --out " + q(dir.path / "m"));
  CHECK(r.status == 3);
  CHECK_FALSE(fs::exists(dir.path / "m.json"));
}
