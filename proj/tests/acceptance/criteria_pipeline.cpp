#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "criteria.hpp"
#include "itf/cli.hpp"
#include "itf/detect.hpp"
#include "itf/enum_names.hpp"
#include "itf/eval.hpp"
#include "itf/extract.hpp"
#include "itf/manifest.hpp"
#include "itf/synthgen.hpp"
#include "tempdir.hpp"

namespace itf::acceptance {
namespace {

namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

EvalReport run_and_score(const GenConfig& cfg) {
  const auto corpus = generate(cfg);
  const auto backend = lexicon_backend();
  const auto findings = run_pipeline(corpus.docs, *backend, default_scanner());
  return evaluate(corpus.gold, findings, MatchMode::Overlap);
}

/// Runs one CLI subcommand; returns the error text on a nonzero exit.
std::string cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code == cli::kSuccess) return {};
  return args.front() + " exited " + std::to_string(code) + ": " + err.str();
}

/// Full command-line pipeline into `dir`; returns the first failure, if any.
std::string pipeline(const fs::path& dir, unsigned threads) {
  const auto p = [&](const char* name) { return (dir / name).string(); };
  const auto t = std::to_string(threads);
  for (auto args : std::vector<std::vector<std::string>>{
           {"synth", "--seed", "1", "--patients", "20000", "--out", dir.string()},
           {"extract", "--corpus", p("corpus.jsonl"), "--out", p("findings.jsonl")},
           {"cohort", "--timelines", p("timelines.jsonl"), "--corpus", p("corpus.jsonl"), "--seed", "1", "--out",
            p("cohort.csv")},
           {"link", "--cohort", p("cohort.csv"), "--timelines", p("timelines.jsonl"), "--findings",
            p("findings.jsonl"), "--out", p("outcomes.csv")},
           {"analyze", "--cohort", p("cohort.csv"), "--outcomes", p("outcomes.csv"), "--findings",
            p("findings.jsonl"), "--out", p("analysis")},
       }) {
    args.insert(args.end(), {"--threads", t});
    if (auto e = cli(args); !e.empty()) return e;
  }
  return {};
}

/// Relative path -> sha256 of every output except run manifests.
std::map<std::string, std::string> digests(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name.size() >= 14 && name.ends_with(".manifest.json")) continue;
    out[fs::relative(entry.path(), dir).generic_string()] = file_sha256(entry.path());
  }
  return out;
}

}  // namespace

Verdict pipeline_round_trip() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();

  GenConfig clean;
  clean.seed = 1;
  clean.n_patients = 20000;
  clean.negation_rate = 0.0;
  clean.distractor_rate = 0.0;
  const auto c = run_and_score(clean);
  v.note("clean corpus: accuracy " + fmt(c.classification.accuracy, 6) + ", exact micro-F1 " +
         fmt(c.exact.micro.f1, 6));
  v.require(c.classification.accuracy == 1.0, "clean accuracy " + fmt(c.classification.accuracy, 6));
  v.require(c.exact.micro.f1 == 1.0, "clean exact micro-F1 " + fmt(c.exact.micro.f1, 6));

  GenConfig defaults;
  defaults.seed = 1;
  defaults.n_patients = 20000;
  const auto d = run_and_score(defaults);
  v.note("default rates: binary F1 " + fmt(d.classification.binary.f1) + ", overlap micro-F1 " +
         fmt(d.overlap.micro.f1));
  v.require(d.classification.binary.f1 >= 0.95, "binary F1 " + fmt(d.classification.binary.f1));
  v.require(d.overlap.micro.f1 >= 0.85, "overlap micro-F1 " + fmt(d.overlap.micro.f1));

  const double secs = seconds_since(start);
  v.require(secs < 60.0, "took " + fmt(secs) + " s (limit 60 s)");
  return v;
}

Verdict generator_calibration() {
  Verdict v;
  GenConfig cfg;
  cfg.seed = 1;
  cfg.n_patients = 20000;
  const auto corpus = generate(cfg);

  std::size_t itf = 0, itn = 0, sized = 0;
  std::array<std::size_t, 5> bins{};
  for (const auto& t : corpus.truth) {
    if (t.label == ReportLabel::NoFinding) continue;
    ++itf;
    if (t.label != ReportLabel::ITN) continue;
    ++itn;
    if (t.expected.size) {
      ++sized;
      ++bins[static_cast<std::size_t>(bin_size(*t.expected.size))];
    }
  }
  const double prevalence = static_cast<double>(itf) / static_cast<double>(corpus.truth.size());
  const double itn_share = static_cast<double>(itn) / static_cast<double>(itf);
  v.note("prevalence " + fmt(prevalence) + ", ITN share " + fmt(itn_share) + ", sized ITN reports " +
         std::to_string(sized));
  v.require(std::abs(prevalence - 0.078) <= 0.006, "prevalence " + fmt(prevalence) + " outside 0.078 +/- 0.006");
  v.require(std::abs(itn_share - 0.929) <= 0.01, "ITN share " + fmt(itn_share) + " outside 0.929 +/- 0.01");

  const std::array<double, 5> target{0.380, 0.406, 0.127, 0.055, 0.033};
  std::string shares;
  for (std::size_t b = 0; b < 5; ++b) {
    const double share = sized ? static_cast<double>(bins[b]) / static_cast<double>(sized) : 0.0;
    const std::string label(to_string(static_cast<SizeBin>(b)));
    shares += (b ? ", " : "") + label + " " + fmt(share, 3);
    v.require(std::abs(share - target[b]) <= 0.03,
              "size bin " + label + " share " + fmt(share, 3) + " outside " + fmt(target[b], 3) + " +/- 0.03");
  }
  v.note("size bins: " + shares);
  return v;
}

Verdict determinism() {
  Verdict v;
  testing::TempDir root("itf_determinism");
  const fs::path runs[] = {root / "a", root / "b", root / "c"};
  const unsigned threads[] = {1, 1, 4};
  std::map<std::string, std::string> reference;
  for (int i = 0; i < 3; ++i) {
    if (auto e = pipeline(runs[i], threads[i]); !e.empty()) {
      v.require(false, "run " + std::to_string(i + 1) + ": " + e);
      return v;
    }
    const auto d = digests(runs[i]);
    if (i == 0) {
      reference = d;
      v.note(std::to_string(d.size()) + " output files compared");
      continue;
    }
    for (const auto& [name, hash] : reference) {
      const auto it = d.find(name);
      v.require(it != d.end() && it->second == hash,
                name + " differs in run " + std::to_string(i + 1) + " (threads " + std::to_string(threads[i]) + ")");
    }
    v.require(d.size() == reference.size(), "run " + std::to_string(i + 1) + " wrote a different file set");
  }
  return v;
}

}  // namespace itf::acceptance
