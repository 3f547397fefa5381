#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "slotic3/bench.hpp"
#include "slotic3/certify.hpp"
#include "slotic3/check_command.hpp"
#include "slotic3/checkout.hpp"
#include "slotic3/corpus.hpp"
#include "slotic3/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace slotic3;

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

std::uint64_t parse_seed(const std::string& s) {
  if (s == "random") return std::random_device{}() * 0x9e3779b97f4a7c15ull ^ std::random_device{}();
  std::size_t used = 0;
  auto v = std::stoull(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

TransitionSystem load_system(const fs::path& aig, std::size_t property) {
  auto c = std::make_shared<const aiger::AigerCircuit>(aiger::parse_file(aig.string()));
  return TransitionSystem(c, property);
}

int report_check(const certify::CheckResult& r, const char* what) {
  if (r.ok) {
    std::cout << "RESULT: VALID\n";
    return 0;
  }
  std::cout << "RESULT: INVALID\n";
  std::cerr << what << " rejected: " << r.obligation << ": " << r.reason << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slotic3: IC3 model checking with certificates, benchmarking and heuristic evolution"};
  app.require_subcommand(1);
  app.fallthrough();
  int verbosity = 0;
  std::string seed_text = std::to_string(kDefaultSeed);
  app.add_flag("-v,--verbose", verbosity, "More progress output on stderr (repeatable)");
  app.add_option("--seed", seed_text, "RNG seed, or 'random'")->capture_default_str();

  // check
  auto* check = app.add_subcommand("check", "Model-check one AIGER property");
  cli::CheckRequest creq;
  std::string check_input;
  double check_timeout = 0;
  std::vector<std::string> check_policies;
  check->add_option("input", check_input, "AIGER file (.aag or .aig)")->required();
  check->add_option("--timeout", check_timeout, "Seconds before giving up (0: none)")->check(CLI::NonNegativeNumber);
  check->add_option("--policy", check_policies, "slot=variant[,key=value...]");
  check->add_flag("--emit-artifacts", creq.emit_artifacts, "Write <stem>.cert or <stem>.cex");
  check->add_option("--out", creq.out_dir, "Artifact directory (default: beside the input)");
  check->add_option("--property", creq.property, "Property index");
  check->add_flag("--verify-lemmas", creq.verify_lemmas, "Re-check every lemma when it is learned");
  check->add_option("--dump-dimacs", creq.dimacs_out, "Write the final clause database");

  // certify / replay
  auto* certify_cmd = app.add_subcommand("certify", "Check a certificate (exit 0 valid, 1 invalid)");
  std::string cert_aig, cert_file;
  std::size_t cert_prop = 0;
  certify_cmd->add_option("aig", cert_aig)->required();
  certify_cmd->add_option("cert", cert_file)->required();
  certify_cmd->add_option("--property", cert_prop);

  auto* replay_cmd = app.add_subcommand("replay", "Replay a counterexample (exit 0 valid, 1 invalid)");
  std::string cex_aig, cex_file;
  std::size_t cex_prop = 0;
  replay_cmd->add_option("aig", cex_aig)->required();
  replay_cmd->add_option("cex", cex_file)->required();
  replay_cmd->add_option("--property", cex_prop);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run a suite and write metrics_v1 JSON");
  std::string suite, bench_out = "metrics.json", solver, work;
  double bench_timeout = 60;
  unsigned jobs = 1;
  std::vector<std::string> bench_policies;
  bench_cmd->add_option("--suite", suite, "Directory of .aag/.aig files or a list file")->required();
  bench_cmd->add_option("--timeout", bench_timeout, "Per-instance timeout in seconds")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench_out, "Metrics file");
  bench_cmd->add_option("--solver", solver, "Solver binary (default: this program)");
  bench_cmd->add_option("--work", work, "Per-run logs and artifacts (default: <out>.runs)");
  bench_cmd->add_option("--policy", bench_policies, "Passed through to every check");

  // evolve
  auto* evolve_cmd = app.add_subcommand("evolve", "Run or resume an evolution schedule");
  std::string config;
  unsigned rounds = 0;
  bool resume = false, verify = false;
  evolve_cmd->add_option("--config", config, "run_config_v1 JSON file")->required();
  evolve_cmd->add_option("--rounds", rounds, "Stop after this many rounds (0: whole schedule)");
  evolve_cmd->add_flag("--resume", resume, "Continue the run recorded in the run directory");
  evolve_cmd->add_flag("--verify-champion", verify, "Rebuild the champion from recorded diffs and gate it");

  // corpus
  auto* corpus_cmd = app.add_subcommand("corpus", "Write generated benchmark circuits");
  std::string corpus_out, corpus_kind = "small";
  std::size_t corpus_count = 50;
  unsigned max_latches = 12;
  corpus_cmd->add_option("--out", corpus_out, "Target directory")->required();
  corpus_cmd->add_option("--kind", corpus_kind, "small or case_study")->check(CLI::IsMember({"small", "case_study"}));
  corpus_cmd->add_option("--count", corpus_count);
  corpus_cmd->add_option("--max-latches", max_latches);

  std::uint64_t seed = kDefaultSeed;
  try {
    app.parse(argc, argv);
    seed = parse_seed(seed_text);
    for (const auto& p : check_policies) creq.policies.set(parse_policy(p));
    for (const auto& p : bench_policies) parse_policy(p);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help();
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (check->parsed()) {
      creq.input = check_input;
      if (check_timeout > 0) creq.timeout_sec = check_timeout;
      return cli::run_check(creq, std::cout, std::cerr);
    }

    if (certify_cmd->parsed()) {
      auto ts = load_system(cert_aig, cert_prop);
      certify::Certificate cert;
      try {
        cert = certify::parse_certificate(checkout::read_file(cert_file));
      } catch (const certify::FormatError& e) {
        return report_check(certify::CheckResult::fail("format", e.what()), "certificate");
      }
      return report_check(certify::check_certificate(ts, cert), "certificate");
    }

    if (replay_cmd->parsed()) {
      auto ts = load_system(cex_aig, cex_prop);
      certify::Witness w;
      try {
        w = certify::parse_witness(checkout::read_file(cex_file));
      } catch (const certify::FormatError& e) {
        return report_check(certify::CheckResult::fail("format", e.what()), "witness");
      }
      return report_check(certify::replay_witness(ts, w), "witness");
    }

    if (bench_cmd->parsed()) {
      bench::SuiteOptions o;
      o.solver.binary = solver.empty() ? fs::read_symlink("/proc/self/exe") : fs::absolute(solver);
      for (const auto& p : bench_policies) {
        o.solver.check_args.push_back("--policy");
        o.solver.check_args.push_back(p);
      }
      o.timeout = bench_timeout;
      o.jobs = jobs;
      o.work_dir = work.empty() ? fs::path(bench_out + ".runs") : fs::path(work);
      auto report = bench::run_suite(bench::expand_suite(suite), o);
      checkout::write_file(bench_out, bench::to_json(report).dump(2) + "\n");
      std::cerr << "instances " << report.runs.size() << ", solved " << report.solved << " (safe "
                << report.safe_count << ", unsafe " << report.unsafe_count << "), timeouts " << report.timeouts
                << ", failed " << report.failed << ", PAR2 " << report.par2 << " s\n";
      if (verbosity > 0)
        for (const auto& r : report.runs)
          std::cerr << "  " << r.id << " " << r.verdict << " " << r.wall_time << " s" << (r.ok ? "" : " FAILED: " + r.error)
                    << "\n";
      return report.all_ok() ? 0 : kExitError;
    }

    if (evolve_cmd->parsed()) {
      auto cfg = evolve::load_config(config);
      if (app.get_option("--seed")->count() > 0) cfg.seed = seed;
      if (verify) {
        auto r = evolve::replay_champion(cfg, cfg.run_dir / "replay");
        std::cerr << "champion " << r.expected_hash << "\nrebuilt  " << r.rebuilt_hash << "\n";
        for (const auto& why : r.reasons) std::cerr << why << "\n";
        return r.ok ? 0 : 1;
      }
      evolve::Orchestrator orch(cfg, evolve::make_agent(cfg.programmer), evolve::make_agent(cfg.evaluator));
      orch.log = [](const std::string& line) { std::cerr << line << "\n"; };
      orch.start(resume);
      orch.run(rounds > 0 ? std::optional<unsigned>(rounds) : std::nullopt);
      std::cerr << (orch.finished() ? "schedule complete" : "stopped") << " after round " << orch.round()
                << "; champion " << orch.champion_hash() << "\n";
      return 0;
    }

    if (corpus_cmd->parsed()) {
      auto instances = corpus_kind == "small" ? corpus::small_corpus(seed, corpus_count, max_latches)
                                              : corpus::case_study_corpus(seed, corpus_count);
      fs::create_directories(corpus_out);
      for (const auto& inst : instances)
        checkout::write_file(fs::path(corpus_out) / (inst.name + ".aag"), aiger::to_ascii(inst.circuit));
      std::cerr << "wrote " << instances.size() << " circuits to " << corpus_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
