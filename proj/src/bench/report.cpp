#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "slotic3/bench.hpp"

namespace slotic3::bench {

using nlohmann::json;

double par2(const std::vector<std::pair<bool, double>>& runs, double timeout) {
  if (!(timeout > 0)) throw std::invalid_argument("par2: timeout must be positive");
  if (runs.empty()) return 0;
  double sum = 0;
  for (const auto& [solved, t] : runs) sum += solved ? t : 2 * timeout;
  return sum / static_cast<double>(runs.size());
}

std::string bucket_of(const std::string& instance) {
  auto name = std::filesystem::path(instance).filename().string();
  auto d = std::find_if(name.begin(), name.end(), [](unsigned char c) { return std::isdigit(c); });
  std::string key(name.begin(), d);
  return key.empty() ? "_" : key;
}

const RunRecord* BenchReport::find(const std::string& id) const {
  for (const auto& r : runs)
    if (r.id == id) return &r;
  return nullptr;
}

BenchReport aggregate(std::vector<RunRecord> runs, double timeout) {
  BenchReport rep;
  rep.timeout = timeout;
  std::stable_sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) { return a.id < b.id; });
  std::vector<std::pair<bool, double>> times;
  std::map<std::string, std::vector<std::pair<bool, double>>> bucket_times;
  for (const auto& r : runs) {
    const bool solved = r.solved();
    times.emplace_back(solved, r.wall_time);
    auto& b = rep.buckets[bucket_of(r.id)];
    bucket_times[bucket_of(r.id)].emplace_back(solved, r.wall_time);
    ++b.runs;
    if (r.verdict == "SAFE" || r.verdict == "UNSAFE") ++rep.claimed;
    if (solved) {
      ++rep.solved;
      ++b.solved;
      if (r.verdict == "SAFE") ++rep.safe_count;
      else ++rep.unsafe_count;
    }
    if (r.verdict == "TIMEOUT") {
      ++rep.timeouts;
      ++b.timeouts;
    }
    if (!r.ok) {
      ++rep.failed;
      ++b.failed;
    }
  }
  rep.par2 = par2(times, timeout);
  for (auto& [k, b] : rep.buckets) b.par2 = par2(bucket_times[k], timeout);
  rep.runs = std::move(runs);
  return rep;
}

json to_json(const BenchReport& r) {
  json runs = json::array();
  for (const auto& x : r.runs) {
    json g = nullptr;
    if (x.gate) g = {{"passed", x.gate->passed}, {"reason", x.gate->reason}};
    runs.push_back({{"id", x.id},
                    {"path", x.path},
                    {"verdict", x.verdict},
                    {"ok", x.ok},
                    {"wall_sec", x.wall_time},
                    {"exit_code", x.exit_code},
                    {"gate", g},
                    {"error", x.error},
                    {"artifacts", {{"cert", x.cert_path}, {"cex", x.cex_path}, {"log", x.log_path}}},
                    {"counters", x.counters}});
  }
  json buckets = json::object();
  for (const auto& [k, b] : r.buckets)
    buckets[k] = {{"runs", b.runs}, {"solved", b.solved}, {"timeouts", b.timeouts}, {"failed", b.failed},
                  {"par2_sec", b.par2}};
  return {{"schema", "metrics_v1"},
          {"timeout_sec", r.timeout},
          {"par2", {{"avg_sec", r.par2}}},
          {"solved", r.solved},
          {"safe", r.safe_count},
          {"unsafe", r.unsafe_count},
          {"timeouts", r.timeouts},
          {"failed", r.failed},
          {"claimed", r.claimed},
          {"buckets", buckets},
          {"runs", runs}};
}

namespace {

template <class T>
T field(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) throw std::runtime_error(std::string("metrics_v1: missing ") + where + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("metrics_v1: bad ") + where + key + ": " + e.what());
  }
}

}  // namespace

BenchReport from_json(const json& j) {
  if (field<std::string>(j, "schema", "") != "metrics_v1") throw std::runtime_error("metrics_v1: wrong schema tag");
  double timeout = field<double>(j, "timeout_sec", "");
  if (!j.contains("runs") || !j["runs"].is_array()) throw std::runtime_error("metrics_v1: runs must be an array");
  std::vector<RunRecord> runs;
  for (const auto& x : j["runs"]) {
    RunRecord r;
    r.id = field<std::string>(x, "id", "runs[*].");
    r.path = field<std::string>(x, "path", "runs[*].");
    r.verdict = field<std::string>(x, "verdict", "runs[*].");
    if (r.verdict != "SAFE" && r.verdict != "UNSAFE" && r.verdict != "TIMEOUT" && r.verdict != "ERROR")
      throw std::runtime_error("metrics_v1: unknown verdict " + r.verdict);
    r.ok = field<bool>(x, "ok", "runs[*].");
    r.wall_time = field<double>(x, "wall_sec", "runs[*].");
    r.exit_code = field<int>(x, "exit_code", "runs[*].");
    r.error = field<std::string>(x, "error", "runs[*].");
    const auto& g = x.at("gate");
    if (!g.is_null()) r.gate = Gate{field<bool>(g, "passed", "runs[*].gate."), field<std::string>(g, "reason", "runs[*].gate.")};
    if ((r.verdict == "SAFE" || r.verdict == "UNSAFE") != r.gate.has_value())
      throw std::runtime_error("metrics_v1: gate must be present exactly for solved verdicts (" + r.id + ")");
    const auto& a = x.at("artifacts");
    r.cert_path = field<std::string>(a, "cert", "runs[*].artifacts.");
    r.cex_path = field<std::string>(a, "cex", "runs[*].artifacts.");
    r.log_path = field<std::string>(a, "log", "runs[*].artifacts.");
    r.counters = field<std::map<std::string, std::string>>(x, "counters", "runs[*].");
    runs.push_back(std::move(r));
  }
  return aggregate(std::move(runs), timeout);
}

}  // namespace slotic3::bench
