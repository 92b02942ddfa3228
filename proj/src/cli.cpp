#include "itf/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "itf/analysis.hpp"
#include "itf/cascade.hpp"
#include "itf/cohort.hpp"
#include "itf/corpus.hpp"
#include "itf/detect.hpp"
#include "itf/errors.hpp"
#include "itf/eval.hpp"
#include "itf/extract.hpp"
#include "itf/manifest.hpp"
#include "itf/synthgen.hpp"
#include "itf/tables.hpp"
#include "itf/timeline.hpp"

namespace itf::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_unsigned(const std::string& name, const std::string& value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (value.empty() || value[0] == '-') throw std::invalid_argument("");
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw UsageError(name + ": expected a non-negative integer, got '" + value + "'");
  return static_cast<T>(v);
}

/// A subcommand's flags with config-file fallbacks.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  void text(const std::string& name, std::string& var, const std::string& help) {
    app_->add_option("--" + name, var, help);
    names_.push_back(name);
    setters_[name] = [&var](const std::string& v) { var = v; };
    getters_[name] = [&var] { return var; };
  }

  template <typename T>
  void number(const std::string& name, T& var, const std::string& help) {
    app_->add_option("--" + name, var, help);
    names_.push_back(name);
    setters_[name] = [&var, name](const std::string& v) { var = parse_unsigned<T>(name, v); };
    getters_[name] = [&var] { return std::to_string(var); };
  }

  bool given(const std::string& name) const { return app_->get_option("--" + name)->count() > 0; }
  bool known(const std::string& name) const { return setters_.count(name) > 0; }

  /// Config value for a flag the command line did not set.
  void fallback(const std::string& name, const std::string& value) {
    if (!given(name)) setters_.at(name)(value);
  }

  std::vector<std::pair<std::string, std::string>> resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& n : names_) {
      if (n == "config") continue;
      out.emplace_back(n, getters_.at(n)());
    }
    return out;
  }

 private:
  CLI::App* app_;
  std::vector<std::string> names_;
  std::map<std::string, std::function<void(const std::string&)>> setters_;
  std::map<std::string, std::function<std::string()>> getters_;
};

struct Settings {
  std::string config;
  std::string out;
  unsigned threads = 1;
  // synth
  std::uint64_t seed = 1;
  std::size_t patients = 0;
  std::vector<std::string> sets;
  // inputs
  std::string corpus, backend = "lexicon", lexicon, timelines, codes, cohort, findings, outcomes, gold, pred,
                      mode = "overlap", in;
};

class Run {
 public:
  Run(std::string command, const std::vector<std::string>& argv) {
    manifest_.command = std::move(command);
    manifest_.argv = argv;
    manifest_.started = utc_timestamp();
  }

  RunManifest& manifest() { return manifest_; }

  fs::path input(const std::string& flag, const std::string& path) {
    if (path.empty()) throw UsageError("missing required --" + flag);
    if (!fs::exists(path)) throw MissingInput("--" + flag + ": no such file: " + path);
    manifest_.inputs.push_back({path, file_sha256(path)});
    return path;
  }

  void output(const fs::path& path, const std::string& content) {
    write_file_atomic(path, content);
    manifest_.outputs.push_back({path.string(), sha256_hex(content)});
  }

  void set_manifest_path(fs::path p) { manifest_path_ = std::move(p); }

  void finish(int code, const std::string& error, std::ostream& err) {
    if (manifest_path_.empty()) return;
    manifest_.exit_code = code;
    manifest_.error = error;
    manifest_.finished = utc_timestamp();
    try {
      write_file_atomic(manifest_path_, manifest_.json());
    } catch (const std::exception& e) {
      err << "itf: cannot write manifest: " << e.what() << "\n";
    }
  }

 private:
  RunManifest manifest_;
  fs::path manifest_path_;
};

std::string env_out_dir() {
  const char* v = std::getenv("ITF_OUT_DIR");
  return v ? std::string(v) : std::string();
}

/// --out for commands that write a directory.
fs::path out_dir(const Settings& s) {
  if (!s.out.empty()) return s.out;
  if (const auto env = env_out_dir(); !env.empty()) return env;
  throw UsageError("missing required --out (or ITF_OUT_DIR)");
}

/// --out for commands that write one file; ITF_OUT_DIR/<default_name> otherwise.
fs::path out_file(const Settings& s, const char* default_name) {
  if (!s.out.empty()) return s.out;
  if (const auto env = env_out_dir(); !env.empty()) return fs::path(env) / default_name;
  throw UsageError("missing required --out (or ITF_OUT_DIR)");
}

fs::path sibling_manifest(const fs::path& file) {
  auto p = file;
  p += ".manifest.json";
  return p;
}

template <typename Fn>
std::string to_text(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

CodeTable load_codes(Run& run, const Settings& s) {
  if (s.codes.empty()) return CodeTable::defaults();
  return CodeTable::from_csv(run.input("codes", s.codes));
}

void write_table(Run& run, const fs::path& dir, const std::string& stem, const Table& t) {
  run.output(dir / (stem + ".csv"), t.csv());
  run.output(dir / (stem + ".txt"), t.text());
}

// --- subcommands ----------------------------------------------------------------

void cmd_synth(Run& run, const Settings& s, const std::vector<std::pair<std::string, std::string>>& gen_keys,
               const Flags& flags) {
  GenConfig g;
  try {
    for (const auto& [k, v] : gen_keys) set_config_value(g, k == "patients" ? "n_patients" : k, v);
    for (const auto& kv : s.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      set_config_value(g, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (flags.given("seed")) g.seed = s.seed;
    if (flags.given("patients")) g.n_patients = s.patients;
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (g.n_patients == 0) throw UsageError("missing required --patients");
  const fs::path dir = out_dir(s);
  run.set_manifest_path(dir / "synth.manifest.json");
  run.manifest().config = config_items(g);
  run.manifest().config.emplace_back("threads", std::to_string(s.threads));
  run.manifest().seeds.emplace_back("seed", g.seed);

  const auto corpus = generate(g, s.threads);
  run.output(dir / "corpus.jsonl", to_text([&](std::ostream& o) { write_corpus(o, corpus.docs); }));
  run.output(dir / "gold.jsonl", to_text([&](std::ostream& o) { write_annotations(o, corpus.gold); }));
  run.output(dir / "timelines.jsonl", to_text([&](std::ostream& o) { write_timelines(o, corpus.timelines); }));
  std::string cfg = "[synth]\n";
  for (const auto& [k, v] : config_items(g)) cfg += k + " = " + v + "\n";
  run.output(dir / "config.txt", cfg);
}

void cmd_extract(Run& run, const Settings& s) {
  if (s.backend != "lexicon") throw UsageError("--backend: unknown backend '" + s.backend + "' (available: lexicon)");
  const fs::path out = out_file(s, "findings.jsonl");
  run.set_manifest_path(sibling_manifest(out));
  const auto docs = read_corpus(run.input("corpus", s.corpus));
  Lexicon lexicon = Lexicon::defaults();
  if (!s.lexicon.empty()) lexicon = Lexicon::from_json(read_file(run.input("lexicon", s.lexicon)));
  const auto backend = lexicon_backend(lexicon);
  const ReportScanner scanner(lexicon);
  const auto findings = run_pipeline(docs, *backend, scanner, s.threads);
  std::string text;
  for (const auto& f : findings) text += finding_line(f) + "\n";
  run.output(out, text);
}

void cmd_cohort(Run& run, const Settings& s) {
  const fs::path out = out_file(s, "cohort.csv");
  run.set_manifest_path(sibling_manifest(out));
  run.manifest().seeds.emplace_back("seed", s.seed);
  const auto timelines = read_timelines(run.input("timelines", s.timelines));
  const auto codes = load_codes(run, s);
  std::vector<ReportDoc> docs;
  std::map<std::string, const ReportDoc*> by_id;
  if (!s.corpus.empty()) {
    docs = read_corpus(run.input("corpus", s.corpus));
    for (const auto& d : docs) by_id.emplace(d.report_id, &d);
  }
  CohortOptions opts;
  opts.seed = s.seed;
  opts.threads = s.threads;
  if (!docs.empty()) opts.reports = &by_id;
  const auto rows = build_cohort(timelines, codes, opts);
  run.output(out, to_text([&](std::ostream& o) { write_cohort_csv(o, rows); }));
}

void cmd_link(Run& run, const Settings& s) {
  const fs::path out = out_file(s, "outcomes.csv");
  run.set_manifest_path(sibling_manifest(out));
  const auto cohort = read_cohort_csv(run.input("cohort", s.cohort));
  const auto timelines = read_timelines(run.input("timelines", s.timelines));
  const auto findings = read_findings(run.input("findings", s.findings));
  const auto codes = load_codes(run, s);
  std::map<std::string, bool> itf_by_report;
  for (const auto& f : findings) itf_by_report[f.report_id] = f.label != ReportLabel::NoFinding;
  const auto outcomes = link_cohort(cohort, timelines, itf_by_report, codes, s.threads);
  run.output(out, to_text([&](std::ostream& o) { write_outcomes_csv(o, outcomes); }));
}

void cmd_analyze(Run& run, const Settings& s) {
  const fs::path dir = out_dir(s);
  run.set_manifest_path(dir / "analyze.manifest.json");
  const auto cohort = read_cohort_csv(run.input("cohort", s.cohort));
  const auto outcomes = read_outcomes_csv(run.input("outcomes", s.outcomes));
  const auto findings = read_findings(run.input("findings", s.findings));

  std::vector<CohortRow> eligible;
  for (const auto& r : cohort) {
    if (r.eligibility == Eligibility::Eligible) eligible.push_back(r);
  }
  std::map<std::string, bool> itf_by_patient;
  for (const auto& o : outcomes) itf_by_patient[o.patient_id] = o.had_itf;
  std::set<std::string> eligible_ids;
  for (const auto& r : eligible) eligible_ids.insert(r.patient_id);
  for (const auto& o : outcomes) {
    if (!eligible_ids.count(o.patient_id)) {
      throw ValidationError("outcomes row for '" + o.patient_id + "' has no eligible cohort row");
    }
  }
  std::map<std::string, const FindingResult*> finding_by_report;
  for (const auto& f : findings) finding_by_report[f.report_id] = &f;
  std::vector<FindingResult> itn;
  for (const auto& r : eligible) {
    if (!itf_by_patient[r.patient_id]) continue;
    auto it = finding_by_report.find(r.index_report_id);
    if (it != finding_by_report.end() && it->second->label == ReportLabel::ITN) itn.push_back(*it->second);
  }

  const auto counts = outcome_counts(outcomes);
  run.output(dir / "counts.csv", counts_csv(counts));
  write_table(run, dir, "table1", table1(eligible, itf_by_patient));
  write_table(run, dir, "table2", table2(itn));
  write_table(run, dir, "table3", table3(counts));

  AnalysisResult result;
  try {
    result = analyze_cohort(eligible, itf_by_patient);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("model: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
  write_table(run, dir, "model", model_table(result));
  write_table(run, dir, "forest", forest_table(result));
  write_table(run, dir, "lasso_path", lasso_table(result));
  run.output(dir / "diagnostics.json", diagnostics_json(result));
}

void cmd_eval(Run& run, const Settings& s) {
  MatchMode mode;
  if (const auto m = enum_from_string<MatchMode>(s.mode)) {
    mode = *m;
  } else {
    throw UsageError("--mode: expected exact or overlap, got '" + s.mode + "'");
  }
  const fs::path out = out_file(s, "eval.json");
  run.set_manifest_path(sibling_manifest(out));
  const auto gold = read_annotations(run.input("gold", s.gold));
  const auto pred = read_findings(run.input("pred", s.pred));
  std::vector<ReportDoc> docs;
  if (!s.corpus.empty()) docs = read_corpus(run.input("corpus", s.corpus));
  run.output(out, eval_json(evaluate(gold, pred, mode, docs)));
}

void cmd_report(Run& run, const Settings& s) {
  if (s.in.empty()) throw UsageError("missing required --in");
  const fs::path in = s.in;
  fs::path dir = s.out;
  if (dir.empty()) dir = env_out_dir();
  if (dir.empty()) dir = in;
  run.set_manifest_path(dir / "report.manifest.json");
  const auto counts = read_counts_csv(run.input("in", (in / "counts.csv").string()));
  write_table(run, dir, "table3", table3(counts));
}

}  // namespace

std::map<std::string, std::map<std::string, std::string>> parse_config(std::string_view text) {
  std::map<std::string, std::map<std::string, std::string>> out;
  std::string section;
  out[section];
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config line " + std::to_string(line_no) + ": unterminated section");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    out[section][key] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incidental thyroid finding pipeline", "itf"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);
  Settings s;

  struct Sub {
    CLI::App* app;
    std::unique_ptr<Flags> flags;
  };
  std::map<std::string, Sub> subs;
  auto sub = [&](const std::string& name, const std::string& help) -> Flags& {
    CLI::App* a = app.add_subcommand(name, help);
    auto f = std::make_unique<Flags>(a);
    f->text("config", s.config, "key = value settings file; flags take precedence");
    f->number("threads", s.threads, "worker threads (outputs do not depend on this)");
    auto& ref = *f;
    subs[name] = {a, std::move(f)};
    return ref;
  };

  {
    auto& f = sub("synth", "generate a synthetic corpus, gold annotations and timelines");
    f.number("seed", s.seed, "generator seed");
    f.number("patients", s.patients, "number of patients");
    f.text("out", s.out, "output directory");
    subs["synth"].app->add_option("--set", s.sets, "generator setting key=value (repeatable)");
  }
  {
    auto& f = sub("extract", "classify reports and extract nodule attributes");
    f.text("corpus", s.corpus, "corpus.jsonl");
    f.text("backend", s.backend, "detector backend");
    f.text("lexicon", s.lexicon, "lexicon JSON replacing the built-in screening terms");
    f.text("out", s.out, "findings.jsonl");
  }
  {
    auto& f = sub("cohort", "build the eligible cohort");
    f.text("timelines", s.timelines, "timelines.jsonl");
    f.text("codes", s.codes, "code table CSV (built-in defaults when absent)");
    f.text("corpus", s.corpus, "corpus.jsonl supplying modality and body group");
    f.number("seed", s.seed, "seed for same-day index selection");
    f.text("out", s.out, "cohort.csv");
  }
  {
    auto& f = sub("link", "link cohort rows to downstream outcomes");
    f.text("cohort", s.cohort, "cohort.csv");
    f.text("timelines", s.timelines, "timelines.jsonl");
    f.text("findings", s.findings, "findings.jsonl");
    f.text("codes", s.codes, "code table CSV (built-in defaults when absent)");
    f.text("out", s.out, "outcomes.csv");
  }
  {
    auto& f = sub("analyze", "univariate and multivariable analyses");
    f.text("cohort", s.cohort, "cohort.csv");
    f.text("outcomes", s.outcomes, "outcomes.csv");
    f.text("findings", s.findings, "findings.jsonl");
    f.text("out", s.out, "output directory");
  }
  {
    auto& f = sub("eval", "score findings against gold annotations");
    f.text("gold", s.gold, "gold.jsonl");
    f.text("pred", s.pred, "findings.jsonl");
    f.text("mode", s.mode, "primary span matching mode: exact or overlap");
    f.text("corpus", s.corpus, "corpus.jsonl, enables token accuracy");
    f.text("out", s.out, "eval.json");
  }
  {
    auto& f = sub("report", "render table3 from counts.csv");
    f.text("in", s.in, "directory holding counts.csv");
    f.text("out", s.out, "output directory (defaults to --in)");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "itf: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  const auto chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  Flags& flags = *subs.at(command).flags;
  Run run(command, args);

  int code = kSuccess;
  std::string error;
  try {
    std::vector<std::pair<std::string, std::string>> gen_keys;
    if (!s.config.empty()) {
      if (!fs::exists(s.config)) throw MissingInput("--config: no such file: " + s.config);
      run.input("config", s.config);
      std::map<std::string, std::map<std::string, std::string>> cfg;
      try {
        cfg = parse_config(read_file(s.config));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      for (const auto* section : {"", command.c_str()}) {
        auto it = cfg.find(section);
        if (it == cfg.end()) continue;
        for (const auto& [k, v] : it->second) {
          if (k == "config") throw UsageError("config files cannot name another config file");
          if (flags.known(k) && !(command == "synth" && (k == "seed" || k == "patients"))) {
            flags.fallback(k, v);
          } else if (command == "synth") {
            gen_keys.emplace_back(k, v);
          } else if (*section == '\0') {
            continue;  // global keys may target other subcommands
          } else {
            throw UsageError("config: unknown setting '" + k + "' for " + command);
          }
        }
      }
    }
    if (s.threads == 0) throw UsageError("--threads must be at least 1");
    run.manifest().threads = s.threads;
    if (command != "synth") run.manifest().config = flags.resolved();

    if (command == "synth") cmd_synth(run, s, gen_keys, flags);
    else if (command == "extract") cmd_extract(run, s);
    else if (command == "cohort") cmd_cohort(run, s);
    else if (command == "link") cmd_link(run, s);
    else if (command == "analyze") cmd_analyze(run, s);
    else if (command == "eval") cmd_eval(run, s);
    else if (command == "report") cmd_report(run, s);
  } catch (const UsageError& e) {
    code = kUsageError;
    error = e.what();
    err << "itf " << command << ": " << e.what() << "\n\n" << chosen->help();
  } catch (const MissingInput& e) {
    code = kMissingInput;
    error = e.what();
    err << "itf " << command << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    code = kDataError;
    error = e.what();
    err << "itf " << command << ": " << e.what() << "\n";
  }
  run.finish(code, error, err);
  return code;
}

}  // namespace itf::cli
