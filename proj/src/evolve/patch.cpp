#include "slotic3/patch.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

namespace slotic3::patch {

namespace fs = std::filesystem;

std::size_t FilePatch::added_lines() const {
  std::size_t n = 0;
  for (const auto& h : hunks)
    for (const auto& l : h.lines) n += l[0] == '+';
  return n;
}

std::size_t FilePatch::removed_lines() const {
  std::size_t n = 0;
  for (const auto& h : hunks)
    for (const auto& l : h.lines) n += l[0] == '-';
  return n;
}

std::vector<std::string> Patch::touched() const {
  std::vector<std::string> out;
  for (const auto& f : files)
    if (std::find(out.begin(), out.end(), f.path()) == out.end()) out.push_back(f.path());
  return out;
}

std::size_t Patch::added_lines() const {
  std::size_t n = 0;
  for (const auto& f : files) n += f.added_lines();
  return n;
}

bool Patch::empty() const {
  for (const auto& f : files)
    if (f.creates() || f.deletes() || f.added_lines() + f.removed_lines() > 0) return false;
  return true;
}

namespace {

std::vector<std::string> split(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t p = 0;
  while (p < text.size()) {
    auto nl = text.find('\n', p);
    auto end = nl == std::string_view::npos ? text.size() : nl;
    lines.emplace_back(text.substr(p, end - p));
    if (nl == std::string_view::npos) break;
    p = nl + 1;
  }
  return lines;
}

std::string header_path(const std::string& line, std::size_t lineno) {
  std::string p = line.substr(4);
  if (auto tab = p.find('\t'); tab != std::string::npos) p.resize(tab);
  while (!p.empty() && (p.back() == ' ' || p.back() == '\r')) p.pop_back();
  if (p == "/dev/null") return {};
  if (p.rfind("a/", 0) == 0 || p.rfind("b/", 0) == 0) p = p.substr(2);
  fs::path fp(p);
  if (p.empty() || fp.is_absolute())
    throw PatchError("line " + std::to_string(lineno) + ": bad path '" + p + "'");
  for (const auto& part : fp)
    if (part == "..") throw PatchError("line " + std::to_string(lineno) + ": path escapes the tree: " + p);
  return fp.lexically_normal().generic_string();
}

std::size_t number(const std::string& s, std::size_t lineno) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw PatchError("line " + std::to_string(lineno) + ": bad hunk header");
  return std::stoul(s);
}

void parse_range(const std::string& r, std::size_t& start, std::size_t& count, std::size_t lineno) {
  auto comma = r.find(',');
  start = number(r.substr(0, comma), lineno);
  count = comma == std::string::npos ? 1 : number(r.substr(comma + 1), lineno);
}

}  // namespace

Patch parse(std::string_view text) {
  auto lines = split(text);
  Patch out;
  std::size_t i = 0;
  while (i < lines.size()) {
    if (lines[i].rfind("--- ", 0) != 0) {
      if (lines[i].rfind("@@", 0) == 0) throw PatchError("line " + std::to_string(i + 1) + ": hunk without file header");
      ++i;
      continue;
    }
    if (i + 1 >= lines.size() || lines[i + 1].rfind("+++ ", 0) != 0)
      throw PatchError("line " + std::to_string(i + 2) + ": expected '+++' header");
    FilePatch fp;
    fp.old_path = header_path(lines[i], i + 1);
    fp.new_path = header_path(lines[i + 1], i + 2);
    if (fp.old_path.empty() && fp.new_path.empty()) throw PatchError("line " + std::to_string(i + 1) + ": both sides are /dev/null");
    if (!fp.old_path.empty() && !fp.new_path.empty() && fp.old_path != fp.new_path)
      throw PatchError("line " + std::to_string(i + 1) + ": renames are not supported");
    i += 2;
    while (i < lines.size() && lines[i].rfind("@@ ", 0) == 0) {
      const std::size_t hline = i + 1;
      std::istringstream hs(lines[i]);
      std::string at1, oldr, newr, at2;
      hs >> at1 >> oldr >> newr >> at2;
      if (oldr.size() < 2 || oldr[0] != '-' || newr.size() < 2 || newr[0] != '+' || at2 != "@@")
        throw PatchError("line " + std::to_string(hline) + ": bad hunk header");
      Hunk h;
      parse_range(oldr.substr(1), h.old_start, h.old_count, hline);
      parse_range(newr.substr(1), h.new_start, h.new_count, hline);
      ++i;
      std::size_t seen_old = 0, seen_new = 0;
      char last = 0;
      while (i < lines.size() && (seen_old < h.old_count || seen_new < h.new_count || (i < lines.size() && lines[i].rfind("\\", 0) == 0))) {
        std::string l = lines[i];
        if (!l.empty() && l.back() == '\r') l.pop_back();
        if (l.rfind("\\", 0) == 0) {
          if (last == '+') h.new_no_eol = true;
          else if (last == '-') h.old_no_eol = true;
          else if (last == ' ') h.new_no_eol = h.old_no_eol = true;
          ++i;
          continue;
        }
        if (l.empty()) l = " ";
        const char k = l[0];
        if (k == ' ') {
          ++seen_old;
          ++seen_new;
        } else if (k == '-') {
          ++seen_old;
        } else if (k == '+') {
          ++seen_new;
        } else {
          throw PatchError("line " + std::to_string(i + 1) + ": unexpected line in hunk");
        }
        if (seen_old > h.old_count || seen_new > h.new_count)
          throw PatchError("line " + std::to_string(i + 1) + ": hunk longer than its header says");
        h.lines.push_back(l);
        last = k;
        ++i;
      }
      if (seen_old != h.old_count || seen_new != h.new_count)
        throw PatchError("line " + std::to_string(hline) + ": hunk is truncated");
      fp.hunks.push_back(std::move(h));
    }
    if (fp.hunks.empty() && !fp.creates() && !fp.deletes())
      throw PatchError("line " + std::to_string(i) + ": file header without hunks");
    out.files.push_back(std::move(fp));
  }
  return out;
}

std::string apply_to(const FilePatch& fp, const std::string& original, std::size_t max_offset) {
  auto lines = split(original);
  bool eol = original.empty() || original.back() == '\n';
  std::size_t floor = 0;
  long delta = 0;
  for (std::size_t hi = 0; hi < fp.hunks.size(); ++hi) {
    const auto& h = fp.hunks[hi];
    std::vector<std::string> old_lines, new_lines;
    for (const auto& l : h.lines) {
      if (l[0] != '+') old_lines.push_back(l.substr(1));
      if (l[0] != '-') new_lines.push_back(l.substr(1));
    }
    // Zero-length old ranges name the line after which to insert.
    long want = static_cast<long>(h.old_count == 0 ? h.old_start : h.old_start - 1) + delta;
    auto matches = [&](long pos) {
      if (pos < static_cast<long>(floor) || pos + static_cast<long>(old_lines.size()) > static_cast<long>(lines.size()))
        return false;
      return std::equal(old_lines.begin(), old_lines.end(), lines.begin() + pos);
    };
    std::optional<long> at;
    for (std::size_t off = 0; off <= max_offset && !at; ++off) {
      if (matches(want - static_cast<long>(off))) at = want - static_cast<long>(off);
      else if (off && matches(want + static_cast<long>(off))) at = want + static_cast<long>(off);
    }
    if (!at) throw PatchError(fp.path() + ": hunk " + std::to_string(hi + 1) + " does not apply");
    const bool at_end = *at + static_cast<long>(old_lines.size()) == static_cast<long>(lines.size());
    lines.erase(lines.begin() + *at, lines.begin() + *at + static_cast<long>(old_lines.size()));
    lines.insert(lines.begin() + *at, new_lines.begin(), new_lines.end());
    if (at_end) eol = !h.new_no_eol;
    floor = static_cast<std::size_t>(*at) + new_lines.size();
    delta += static_cast<long>(new_lines.size()) - static_cast<long>(old_lines.size());
  }
  std::string out;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    out += lines[k];
    if (k + 1 < lines.size() || eol) out += '\n';
  }
  return out;
}

void apply(const Patch& p, const fs::path& root, std::size_t max_offset) {
  std::map<std::string, std::optional<std::string>> staged;
  auto read = [&](const std::string& rel) -> std::optional<std::string> {
    if (auto it = staged.find(rel); it != staged.end()) return it->second;
    std::ifstream in(root / rel, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const auto& fp : p.files) {
    auto cur = read(fp.path());
    if (fp.creates() && cur) throw PatchError(fp.path() + ": already exists");
    if (!fp.creates() && !cur) throw PatchError(fp.path() + ": no such file");
    auto next = apply_to(fp, cur.value_or(""), max_offset);
    if (fp.deletes()) {
      if (!next.empty()) throw PatchError(fp.path() + ": deletion leaves content behind");
      staged[fp.path()] = std::nullopt;
    } else {
      staged[fp.path()] = next;
    }
  }
  for (const auto& [rel, content] : staged) {
    if (!content) {
      fs::remove(root / rel);
      continue;
    }
    fs::create_directories((root / rel).parent_path());
    std::ofstream out(root / rel, std::ios::binary | std::ios::trunc);
    out << *content;
    if (!out) throw PatchError(rel + ": write failed");
  }
}

std::vector<std::string> admission_errors(const Patch& p, const AdmissionRules& rules,
                                          const std::vector<std::string>& allowed_files) {
  std::vector<std::string> errs;
  if (p.empty()) errs.push_back("patch changes nothing");
  if (p.added_lines() > rules.max_added_lines)
    errs.push_back("adds " + std::to_string(p.added_lines()) + " lines (limit " + std::to_string(rules.max_added_lines) + ")");
  auto files = p.touched();
  if (files.size() > rules.max_files)
    errs.push_back("touches " + std::to_string(files.size()) + " files (limit " + std::to_string(rules.max_files) + ")");
  for (const auto& f : files) {
    auto ext = fs::path(f).extension().string();
    if (std::find(rules.extensions.begin(), rules.extensions.end(), ext) == rules.extensions.end())
      errs.push_back(f + ": not a project source file");
    for (const auto& dir : rules.forbidden)
      if (f.rfind(dir, 0) == 0) errs.push_back(f + ": inside forbidden directory " + dir);
    if (std::find(allowed_files.begin(), allowed_files.end(), f) == allowed_files.end())
      errs.push_back(f + ": outside the allowed slots");
  }
  return errs;
}

}  // namespace slotic3::patch
