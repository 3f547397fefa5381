#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slotic3/exit_codes.hpp"

namespace slotic3::bench {

using enum ::slotic3::ExitCode;

/// Mean of the run times with every unsolved run counted as 2 x timeout.
/// An empty list gives 0.
double par2(const std::vector<std::pair<bool, double>>& runs, double timeout);

/// Bucketing key: the file name (without directories) up to the first digit.
std::string bucket_of(const std::string& instance);

struct Gate {
  bool passed = true;
  std::string reason;
  bool operator==(const Gate&) const = default;
};

struct RunRecord {
  std::string id;
  std::string path;
  /// SAFE, UNSAFE, TIMEOUT or ERROR.
  std::string verdict = "ERROR";
  double wall_time = 0;
  int exit_code = -1;
  /// Present iff verdict is SAFE or UNSAFE.
  std::optional<Gate> gate;
  /// Pass/fail truth for the run: the run did not crash and, when solved,
  /// its artifact passed the gate. Timeouts are ok (merely unsolved).
  bool ok = false;
  std::string error;
  std::string cert_path;
  std::string cex_path;
  std::string log_path;
  std::map<std::string, std::string> counters;

  bool solved() const { return ok && (verdict == "SAFE" || verdict == "UNSAFE"); }
  bool operator==(const RunRecord&) const = default;
};

struct BucketStats {
  std::size_t runs = 0;
  std::size_t solved = 0;
  std::size_t timeouts = 0;
  std::size_t failed = 0;
  double par2 = 0;
  bool operator==(const BucketStats&) const = default;
};

struct BenchReport {
  double timeout = 0;
  std::vector<RunRecord> runs;
  double par2 = 0;
  std::size_t solved = 0;
  std::size_t safe_count = 0;
  std::size_t unsafe_count = 0;
  std::size_t timeouts = 0;
  /// Runs with ok = false (crashes, parse errors, gate failures).
  std::size_t failed = 0;
  /// Runs claiming SAFE/UNSAFE regardless of the gate.
  std::size_t claimed = 0;
  std::map<std::string, BucketStats> buckets;

  bool all_ok() const { return failed == 0; }
  const RunRecord* find(const std::string& id) const;
};

/// Sorts runs by id and recomputes every statistic. A run that is not ok
/// counts as unsolved for PAR2.
BenchReport aggregate(std::vector<RunRecord> runs, double timeout);

/// `metrics_v1` document. Stored values are never rounded.
nlohmann::json to_json(const BenchReport& r);
/// Reads runs back and re-aggregates; throws std::runtime_error on a
/// schema violation.
BenchReport from_json(const nlohmann::json& j);

/// How to invoke one solver binary. The harness runs
/// `<binary> <args...> check <instance> --timeout <t> --emit-artifacts --out <dir>`.
struct SolverCommand {
  std::filesystem::path binary;
  std::vector<std::string> args;
  /// Extra arguments placed after the check options (e.g. --policy ...).
  std::vector<std::string> check_args;
};

struct SuiteOptions {
  SolverCommand solver;
  double timeout = 60;
  unsigned jobs = 1;
  /// Kill grace beyond the timeout.
  double grace = 2;
  /// Per-run artifacts and logs go to <work_dir>/<id>/.
  std::filesystem::path work_dir;
};

/// Runs one instance in a child process and gates its artifacts.
RunRecord run_one(const std::filesystem::path& instance, const SuiteOptions& opts);

/// Runs every instance with up to `jobs` concurrent children.
BenchReport run_suite(const std::vector<std::filesystem::path>& suite, const SuiteOptions& opts);

/// A directory (every .aag/.aig inside, sorted) or a text file listing one
/// path per line (relative to the list file).
std::vector<std::filesystem::path> expand_suite(const std::filesystem::path& dir_or_list);

/// Instance id: the file name without its extension.
std::string instance_id(const std::filesystem::path& p);

}  // namespace slotic3::bench
