#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slotic3::patch {

class PatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Hunk {
  std::size_t old_start = 0, old_count = 0;
  std::size_t new_start = 0, new_count = 0;
  /// Lines with their ' ', '-' or '+' prefix, without newline.
  std::vector<std::string> lines;
  /// A "\ No newline at end of file" marker followed the last new line.
  bool new_no_eol = false;
  bool old_no_eol = false;
};

struct FilePatch {
  /// Repository-relative paths; empty for /dev/null.
  std::string old_path;
  std::string new_path;
  std::vector<Hunk> hunks;

  bool creates() const { return old_path.empty(); }
  bool deletes() const { return new_path.empty(); }
  const std::string& path() const { return deletes() ? old_path : new_path; }
  std::size_t added_lines() const;
  std::size_t removed_lines() const;
};

struct Patch {
  std::vector<FilePatch> files;

  std::vector<std::string> touched() const;
  std::size_t added_lines() const;
  /// No file carries a change.
  bool empty() const;
};

/// Parses a unified diff (plain or git style). `a/` and `b/` prefixes are
/// stripped. Throws PatchError with the offending line number.
Patch parse(std::string_view text);

/// Applies the patch to the tree rooted at `root`. Context must match
/// exactly; a hunk may be found up to `max_offset` lines from its stated
/// position. All files are checked before any is written.
void apply(const Patch& p, const std::filesystem::path& root, std::size_t max_offset = 50);

/// Applies one file patch to a file's content.
std::string apply_to(const FilePatch& fp, const std::string& original, std::size_t max_offset = 50);

struct AdmissionRules {
  std::size_t max_added_lines = 80;
  std::size_t max_files = 3;
  std::vector<std::string> extensions{".c", ".cc", ".cpp", ".h", ".hpp"};
  /// Path prefixes no patch may touch.
  std::vector<std::string> forbidden;
};

/// Returns the reasons a patch is inadmissible (empty when admitted).
/// `allowed_files` is the union of the allowed slots' manifests.
std::vector<std::string> admission_errors(const Patch& p, const AdmissionRules& rules,
                                          const std::vector<std::string>& allowed_files);

}  // namespace slotic3::patch
