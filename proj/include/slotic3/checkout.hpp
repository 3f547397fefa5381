#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace slotic3::checkout {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Regular files below `root`, repository-relative with '/' separators,
/// sorted. Paths whose first component is in `exclude` are skipped.
std::vector<std::string> list_files(const std::filesystem::path& root, const std::vector<std::string>& exclude);

/// Content hash of a tree: SHA-256 over (path, size, bytes) of every listed
/// file in order. Independent of timestamps and of excluded entries.
std::string tree_hash(const std::filesystem::path& root, const std::vector<std::string>& exclude);

/// Replaces `to` with a copy of `from`, skipping excluded top-level entries
/// of the source and leaving excluded entries of the destination alone.
void mirror(const std::filesystem::path& from, const std::filesystem::path& to, const std::vector<std::string>& exclude);

struct CommandResult {
  int exit_code = -1;
  bool timed_out = false;
  double seconds = 0;
  std::string output;
  bool ok() const { return exit_code == 0 && !timed_out; }
};

/// Runs `/bin/sh -c command` in `cwd`, capturing stdout and stderr
/// together; killed after `timeout_sec`.
CommandResult run_shell(const std::string& command, const std::filesystem::path& cwd, double timeout_sec);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

}  // namespace slotic3::checkout
