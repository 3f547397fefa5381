#include "slotic3/checkout.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace slotic3::checkout {

namespace fs = std::filesystem;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  }
  void update(std::string_view d) { EVP_DigestUpdate(ctx_.get(), d.data(), d.size()); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
      out.push_back(digits[md[i] >> 4]);
      out.push_back(digits[md[i] & 15]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

bool excluded(const fs::path& rel, const std::vector<std::string>& exclude) {
  auto first = rel.begin()->string();
  return std::find(exclude.begin(), exclude.end(), first) != exclude.end();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::vector<std::string> list_files(const fs::path& root, const std::vector<std::string>& exclude) {
  std::vector<std::string> out;
  for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
    auto rel = fs::relative(it->path(), root);
    if (excluded(rel, exclude)) {
      if (it->is_directory()) it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file()) out.push_back(rel.generic_string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string tree_hash(const fs::path& root, const std::vector<std::string>& exclude) {
  Sha256 h;
  for (const auto& rel : list_files(root, exclude)) {
    auto data = read_file(root / rel);
    h.update(rel);
    h.update(std::string_view("\0", 1));
    h.update(std::to_string(data.size()));
    h.update(std::string_view("\0", 1));
    h.update(data);
  }
  return h.hex();
}

void mirror(const fs::path& from, const fs::path& to, const std::vector<std::string>& exclude) {
  fs::create_directories(to);
  for (const auto& e : fs::directory_iterator(to))
    if (!excluded(fs::relative(e.path(), to), exclude)) fs::remove_all(e.path());
  for (const auto& rel : list_files(from, exclude)) {
    fs::create_directories((to / rel).parent_path());
    fs::copy_file(from / rel, to / rel, fs::copy_options::overwrite_existing);
  }
}

CommandResult run_shell(const std::string& command, const fs::path& cwd, double timeout_sec) {
  using Clock = std::chrono::steady_clock;
  auto log = fs::temp_directory_path() / ("slotic3_cmd_" + std::to_string(getpid()) + "_" +
                                          std::to_string(Clock::now().time_since_epoch().count()) + ".log");
  CommandResult r;
  auto start = Clock::now();
  pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    setpgid(0, 0);
    int fd = open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    int nul = open("/dev/null", O_RDONLY);
    if (fd < 0 || nul < 0 || chdir(cwd.c_str()) != 0) _exit(127);
    dup2(nul, 0);
    dup2(fd, 1);
    dup2(fd, 2);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  int status = 0;
  for (;;) {
    if (waitpid(pid, &status, WNOHANG) == pid) break;
    if (!r.timed_out && std::chrono::duration<double>(Clock::now() - start).count() > timeout_sec) {
      kill(-pid, SIGKILL);
      r.timed_out = true;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  try {
    r.output = read_file(log);
  } catch (const std::exception&) {
  }
  fs::remove(log);
  return r;
}

}  // namespace slotic3::checkout
