#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace itf {

inline constexpr std::string_view kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view data);
/// Throws std::runtime_error when the file cannot be read.
std::string file_sha256(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers never see a
/// partial file. Creates missing parent directories. Throws std::runtime_error.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct FileDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::vector<std::pair<std::string, std::string>> config;  // resolved settings, in order
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  unsigned threads = 1;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::string started;  // UTC, ISO-8601
  std::string finished;
  int exit_code = 0;
  std::string error;

  /// SHA-256 over "key=value\n" lines of `config`.
  std::string config_hash() const;
  std::string json() const;
};

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace itf
