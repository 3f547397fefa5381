// Child-process execution of one solver run and the artifact gate.
#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "slotic3/aiger.hpp"
#include "slotic3/bench.hpp"
#include "slotic3/certify.hpp"
#include "slotic3/encode.hpp"

namespace slotic3::bench {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string instance_id(const fs::path& p) { return p.stem().string(); }

std::vector<fs::path> expand_suite(const fs::path& dir_or_list) {
  std::vector<fs::path> out;
  if (fs::is_directory(dir_or_list)) {
    for (const auto& e : fs::directory_iterator(dir_or_list)) {
      auto ext = e.path().extension();
      if (e.is_regular_file() && (ext == ".aag" || ext == ".aig")) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::ifstream in(dir_or_list);
  if (!in) throw std::runtime_error("cannot read suite " + dir_or_list.string());
  for (std::string line; std::getline(in, line);) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    fs::path p = line.substr(b, e - b + 1);
    out.push_back(p.is_absolute() ? p : dir_or_list.parent_path() / p);
  }
  return out;
}

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Child {
  pid_t pid = -1;
  Clock::time_point start;
  bool killed = false;
};

Child spawn(const std::vector<std::string>& argv, const fs::path& out, const fs::path& err) {
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  Child c;
  c.start = Clock::now();
  c.pid = fork();
  if (c.pid < 0) throw std::runtime_error("fork failed");
  if (c.pid == 0) {
    setpgid(0, 0);
    int o = open(out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    int e = open(err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    int n = open("/dev/null", O_RDONLY);
    if (o < 0 || e < 0 || n < 0) _exit(127);
    dup2(n, 0);
    dup2(o, 1);
    dup2(e, 2);
    execv(args[0], args.data());
    _exit(127);
  }
  setpgid(c.pid, c.pid);
  return c;
}

// Blocks until the child exits, killing its process group at the deadline.
int reap(Child& c, Clock::time_point deadline) {
  int status = 0;
  for (;;) {
    pid_t r = waitpid(c.pid, &status, WNOHANG);
    if (r == c.pid) return status;
    if (r < 0) throw std::runtime_error("waitpid failed");
    if (!c.killed && Clock::now() >= deadline) {
      kill(-c.pid, SIGKILL);
      kill(c.pid, SIGKILL);
      c.killed = true;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

Gate gate_artifacts(const aiger::AigerCircuit& circuit, const std::string& verdict, const fs::path& cert,
                    const fs::path& cex) {
  TransitionSystem ts(std::make_shared<const aiger::AigerCircuit>(circuit));
  if (verdict == "SAFE") {
    if (!fs::exists(cert)) return {false, "missing certificate"};
    certify::Certificate c;
    try {
      c = certify::parse_certificate(slurp(cert));
    } catch (const certify::FormatError& e) {
      return {false, std::string("certificate format: ") + e.what()};
    }
    auto r = certify::check_certificate(ts, c);
    if (!r.ok) return {false, "certificate " + r.obligation + ": " + r.reason};
    return {};
  }
  if (!fs::exists(cex)) return {false, "missing witness"};
  certify::Witness w;
  try {
    w = certify::parse_witness(slurp(cex));
  } catch (const certify::FormatError& e) {
    return {false, std::string("witness format: ") + e.what()};
  }
  auto r = certify::replay_witness(ts, w);
  if (!r.ok) return {false, "witness " + r.obligation + ": " + r.reason};
  return {};
}

struct Pending {
  RunRecord rec;
  Child child;
  fs::path dir;
  std::optional<aiger::AigerCircuit> circuit;
};

Pending start(const fs::path& instance, const SuiteOptions& opts) {
  Pending p;
  p.rec.id = instance_id(instance);
  p.rec.path = instance.string();
  p.dir = opts.work_dir / p.rec.id;
  fs::create_directories(p.dir);
  p.rec.log_path = (p.dir / "stderr.log").string();
  try {
    p.circuit = aiger::parse_file(instance.string());
  } catch (const std::exception& e) {
    p.rec.error = std::string("parse: ") + e.what();
    return p;
  }
  std::ostringstream t;
  t.precision(17);
  t << opts.timeout;
  std::vector<std::string> argv{opts.solver.binary.string()};
  argv.insert(argv.end(), opts.solver.args.begin(), opts.solver.args.end());
  for (const std::string& a : {std::string("check"), fs::absolute(instance).string(), std::string("--timeout"), t.str(),
                               std::string("--emit-artifacts"), std::string("--out"), fs::absolute(p.dir).string()})
    argv.push_back(a);
  argv.insert(argv.end(), opts.solver.check_args.begin(), opts.solver.check_args.end());
  p.child = spawn(argv, p.dir / "stdout.txt", p.dir / "stderr.log");
  return p;
}

void finish(Pending& p, int status, const SuiteOptions& opts) {
  auto& r = p.rec;
  r.wall_time = std::chrono::duration<double>(Clock::now() - p.child.start).count();
  std::string result;
  std::istringstream out(slurp(p.dir / "stdout.txt"));
  for (std::string line; std::getline(out, line);) {
    if (line.rfind("RESULT: ", 0) == 0) result = line.substr(8);
    if (line.rfind(". HYP ", 0) == 0) {
      auto colon = line.find(": ", 6);
      if (colon != std::string::npos) r.counters[line.substr(6, colon - 6)] = line.substr(colon + 2);
    }
  }
  r.cert_path = (p.dir / (r.id + ".cert")).string();
  r.cex_path = (p.dir / (r.id + ".cex")).string();
  if (p.child.killed) {
    r.verdict = "TIMEOUT";
    r.ok = true;
    return;
  }
  if (WIFSIGNALED(status)) {
    r.error = "killed by signal " + std::to_string(WTERMSIG(status));
    return;
  }
  r.exit_code = WEXITSTATUS(status);
  if (result == "TIMEOUT" && r.exit_code == kExitTimeout) {
    r.verdict = "TIMEOUT";
    r.ok = true;
    return;
  }
  if (result != "SAFE" && result != "UNSAFE") {
    r.error = result.empty() ? "no RESULT line (exit " + std::to_string(r.exit_code) + ")"
                             : "inconsistent RESULT " + result + " with exit " + std::to_string(r.exit_code);
    return;
  }
  if (r.wall_time > opts.timeout) {
    // Answered, but past the limit: counted as a timeout.
    r.verdict = "TIMEOUT";
    r.ok = true;
    return;
  }
  r.verdict = result;
  const int expected = result == "SAFE" ? kExitSafe : kExitUnsafe;
  if (r.exit_code != expected)
    r.gate = Gate{false, "inconsistent return code " + std::to_string(r.exit_code) + " for " + result};
  else
    r.gate = gate_artifacts(*p.circuit, result, r.cert_path, r.cex_path);
  r.ok = r.gate->passed;
}

}  // namespace

RunRecord run_one(const fs::path& instance, const SuiteOptions& opts) {
  auto p = start(instance, opts);
  if (p.child.pid < 0) return p.rec;
  auto deadline = p.child.start + std::chrono::duration_cast<Clock::duration>(
                                      std::chrono::duration<double>(opts.timeout + opts.grace));
  int status = reap(p.child, deadline);
  finish(p, status, opts);
  return p.rec;
}

BenchReport run_suite(const std::vector<fs::path>& suite, const SuiteOptions& opts) {
  if (!(opts.timeout > 0)) throw std::invalid_argument("timeout must be positive");
  std::vector<RunRecord> done;
  std::vector<Pending> running;
  std::size_t next = 0;
  const std::size_t jobs = std::max(1u, opts.jobs);
  const auto budget = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opts.timeout + opts.grace));
  while (next < suite.size() || !running.empty()) {
    while (next < suite.size() && running.size() < jobs) {
      auto p = start(suite[next++], opts);
      if (p.child.pid < 0)
        done.push_back(std::move(p.rec));
      else
        running.push_back(std::move(p));
    }
    bool progressed = false;
    for (std::size_t i = 0; i < running.size();) {
      auto& p = running[i];
      int status = 0;
      pid_t r = waitpid(p.child.pid, &status, WNOHANG);
      if (r == p.child.pid) {
        finish(p, status, opts);
        done.push_back(std::move(p.rec));
        running.erase(running.begin() + static_cast<long>(i));
        progressed = true;
        continue;
      }
      if (!p.child.killed && Clock::now() - p.child.start >= budget) {
        kill(-p.child.pid, SIGKILL);
        kill(p.child.pid, SIGKILL);
        p.child.killed = true;
      }
      ++i;
    }
    if (!progressed) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  return aggregate(std::move(done), opts.timeout);
}

}  // namespace slotic3::bench
