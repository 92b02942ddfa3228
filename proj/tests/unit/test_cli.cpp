#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "itf/cli.hpp"
#include "itf/manifest.hpp"
#include "tempdir.hpp"

using namespace itf;
using itf::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const fs::path kGolden = fs::path(ITF_TEST_DATA_DIR) / "golden";

}  // namespace

TEST_CASE("unknown subcommand prints usage and exits 2") {
  const auto r = run_cli({"frobnicate"});
  CHECK(r.code == cli::kUsageError);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run_cli({}).code == cli::kUsageError);
  CHECK(run_cli({"synth", "--bogus", "1"}).code == cli::kUsageError);
}

TEST_CASE("report reproduces the golden table3.csv byte for byte") {
  TempDir dir("itf_report");
  const auto r = run_cli({"report", "--in", kGolden.string(), "--out", dir.path().string()});
  REQUIRE(r.code == cli::kSuccess);
  CHECK(read_file(dir.path() / "table3.csv") == read_file(kGolden / "table3.csv"));
  CHECK(fs::exists(dir.path() / "table3.txt"));
  CHECK(fs::exists(dir.path() / "report.manifest.json"));
}

TEST_CASE("missing inputs exit 3 and malformed data exits 1") {
  TempDir dir("itf_missing");
  CHECK(run_cli({"report", "--in", (dir.path() / "nope").string()}).code == cli::kMissingInput);
  {
    std::ofstream f(dir.path() / "counts.csv");
    f << "outcome,itf_yes,itf_no,non_itf_yes,non_itf_no\nbiopsy,x,1,1,1\n";
  }
  CHECK(run_cli({"report", "--in", dir.path().string()}).code == cli::kDataError);
  CHECK(run_cli({"extract", "--corpus", dir / "absent.jsonl", "--out", dir / "f.jsonl"}).code ==
        cli::kMissingInput);
}

TEST_CASE("parse_config sections and comments") {
  const auto cfg = cli::parse_config("seed = 3\n# comment\n[synth]\npatients=10\n; other\nnegation_rate = 0\n");
  CHECK(cfg.at("").at("seed") == "3");
  CHECK(cfg.at("synth").at("patients") == "10");
  CHECK(cfg.at("synth").at("negation_rate") == "0");
  CHECK_THROWS_AS(cli::parse_config("no equals sign\n"), std::invalid_argument);
}

TEST_CASE("synth, extract and eval through the command line") {
  TempDir dir("itf_cli_pipeline");
  const auto out = dir.path() / "run";
  {
    std::ofstream cfg(dir.path() / "gen.conf");
    cfg << "[synth]\nnegation_rate = 0\ndistractor_rate = 0\n";
  }
  const auto synth = run_cli({"synth", "--seed", "5", "--patients", "300", "--out", out.string(), "--config",
                              dir / "gen.conf"});
  REQUIRE(synth.code == cli::kSuccess);
  for (const char* f : {"corpus.jsonl", "gold.jsonl", "timelines.jsonl", "config.txt", "synth.manifest.json"}) {
    CHECK(fs::exists(out / f));
  }
  const auto written = cli::parse_config(read_file(out / "config.txt"));
  CHECK(std::stod(written.at("synth").at("negation_rate")) == 0.0);
  CHECK(written.at("synth").at("seed") == "5");

  const auto manifest = nlohmann::json::parse(read_file(out / "synth.manifest.json"));
  CHECK(manifest.at("command") == "synth");
  CHECK(manifest.at("exit_code") == 0);
  CHECK(manifest.contains("outputs"));

  REQUIRE(run_cli({"extract", "--corpus", (out / "corpus.jsonl").string(), "--backend", "lexicon", "--out",
                   (out / "findings.jsonl").string(), "--threads", "2"})
              .code == cli::kSuccess);
  CHECK(fs::exists(out / "findings.jsonl.manifest.json"));
  REQUIRE(run_cli({"eval", "--gold", (out / "gold.jsonl").string(), "--pred", (out / "findings.jsonl").string(),
                   "--mode", "exact", "--out", (out / "eval.json").string()})
              .code == cli::kSuccess);
  const auto ev = nlohmann::json::parse(read_file(out / "eval.json"));
  CHECK(ev.at("classification").at("accuracy").get<double>() == 1.0);
  CHECK(ev.at("spans").at("exact").at("micro").at("f1").get<double>() == 1.0);

  CHECK(run_cli({"extract", "--corpus", (out / "corpus.jsonl").string(), "--backend", "transformer", "--out",
                 (out / "x.jsonl").string()})
            .code == cli::kUsageError);
  CHECK(run_cli({"synth", "--patients", "5", "--out", (out / "bad").string(), "--set", "itf_prevalence=2"}).code ==
        cli::kUsageError);
}

TEST_CASE("ITF_OUT_DIR supplies the output directory") {
  TempDir dir("itf_env");
  ::setenv("ITF_OUT_DIR", dir.path().c_str(), 1);
  const auto r = run_cli({"synth", "--seed", "2", "--patients", "20"});
  ::unsetenv("ITF_OUT_DIR");
  REQUIRE(r.code == cli::kSuccess);
  CHECK(fs::exists(dir.path() / "corpus.jsonl"));
}

TEST_CASE("sha256 digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
