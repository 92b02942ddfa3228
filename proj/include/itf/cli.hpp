#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace itf::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kDataError = 1,     // malformed or inconsistent input data
  kUsageError = 2,    // unknown subcommand or flag, missing flag, bad setting
  kMissingInput = 3,  // an input path does not exist
};

/// Config file text: "key = value" lines, optional "[section]" headers, '#' or ';'
/// comments. Keys before any header belong to section "". Throws std::invalid_argument
/// with the line number on malformed lines.
std::map<std::string, std::map<std::string, std::string>> parse_config(std::string_view text);

/// Runs one subcommand. `args` excludes the program name.
///
/// Subcommands: synth, extract, cohort, link, analyze, eval, report. Every run that gets
/// as far as an output location writes a manifest next to its outputs; ITF_OUT_DIR supplies
/// the output location when --out is absent.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace itf::cli
