#include "slotic3/check_command.hpp"

#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "slotic3/aiger.hpp"
#include "slotic3/certify.hpp"

namespace slotic3::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

int run_check(const CheckRequest& req, std::ostream& out, std::ostream& err, const CheckHooks& hooks) {
  std::shared_ptr<const aiger::AigerCircuit> circuit;
  try {
    circuit = std::make_shared<const aiger::AigerCircuit>(aiger::parse_file(req.input.string()));
  } catch (const std::exception& e) {
    err << "error: " << req.input.string() << ": " << e.what() << "\n";
    return kExitError;
  }
  try {
    TransitionSystem ts(circuit, req.property);
    ic3::CheckOptions opts;
    opts.timeout_sec = req.timeout_sec;
    opts.policies = req.policies;
    opts.verify_lemmas = req.verify_lemmas;
    err << "policies: " << opts.policies.str() << "\n";
    ic3::Engine engine(ts, opts);
    auto early = hooks.shortcut ? hooks.shortcut(ts) : std::nullopt;
    auto v = early ? *early : engine.check();
    if (hooks.after_check) hooks.after_check(ts, v);
    if (!req.dimacs_out.empty() && !early) {
      std::ofstream f(req.dimacs_out);
      engine.main_solver().write_dimacs(f);
    }

    if (req.emit_artifacts && v.result != ic3::Result::Timeout) {
      auto dir = req.out_dir.empty() ? req.input.parent_path() : req.out_dir;
      if (!dir.empty()) fs::create_directories(dir);
      auto stem = req.input.stem().string();
      if (v.result == ic3::Result::Safe && v.certificate) {
        write_text(dir / (stem + ".cert"), certify::write_certificate(*v.certificate));
      } else if (v.result == ic3::Result::Unsafe && v.witness) {
        write_text(dir / (stem + ".cex"), certify::write_witness(*v.witness));
      }
    }

    out << "RESULT: " << ic3::result_name(v.result) << "\n";
    for (const auto& [k, val] : v.stats.entries()) out << ". HYP " << k << ": " << val << "\n";
    out.flush();
    switch (v.result) {
      case ic3::Result::Safe: return kExitSafe;
      case ic3::Result::Unsafe: return kExitUnsafe;
      case ic3::Result::Timeout: return kExitTimeout;
    }
  } catch (const PolicyError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

int check_main(int argc, char** argv, const PolicySet& defaults, const CheckHooks& hooks) {
  CLI::App app{"IC3 model checker (check only)"};
  CheckRequest req;
  req.policies = defaults;
  std::string first;
  std::string input;
  double timeout = 0;
  std::vector<std::string> policies;
  app.add_option("args", first, "'check' or the input file")->required();
  app.add_option("input", input, "AIGER file when the first argument is 'check'");
  app.add_option("--timeout", timeout, "Seconds before giving up (0: none)")->check(CLI::NonNegativeNumber);
  app.add_option("--policy", policies, "slot=variant[,key=value...]");
  app.add_flag("--emit-artifacts", req.emit_artifacts, "Write the certificate or counterexample");
  app.add_option("--out", req.out_dir, "Artifact directory");
  app.add_option("--property", req.property, "Property index");
  app.add_flag("--verify-lemmas", req.verify_lemmas, "Re-check every lemma when it is learned");
  app.add_option("--dump-dimacs", req.dimacs_out, "Write the final clause database");
  try {
    app.parse(argc, argv);
    if (first == "check") {
      if (input.empty()) throw CLI::RequiredError("input");
      req.input = input;
    } else {
      if (!input.empty()) throw CLI::ExtrasError({input});
      req.input = first;
    }
    for (const auto& p : policies) req.policies.set(parse_policy(p));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help();
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const PolicyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (timeout > 0) req.timeout_sec = timeout;
  return run_check(req, std::cout, std::cerr, hooks);
}

}  // namespace slotic3::cli
