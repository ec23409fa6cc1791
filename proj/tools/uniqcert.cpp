// Command line front end: certify / solve / probe / study over a JSON
// problem config. Reports go to stdout or --out; exit code 0 means the
// requested verdict holds, 2 means it does not, 1 means the run itself
// failed (bad config, unreadable file, no convergence inside a solver).

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "uniqcert/uniqcert.hpp"

namespace {

struct CliArgs {
  std::string config_path;
  uniqcert::RunOptions run;
  std::string command;
};

void add_common(CLI::App* sub, CliArgs& args, bool with_seed) {
  sub->add_option("--config", args.config_path, "problem config (JSON)")
      ->required();
  sub->add_option("--out", args.run.out_path,
                  "write the report here instead of stdout");
  sub->add_option("--fields", args.run.fields_dir,
                  "directory for CSV dumps of grid fields");
  sub->add_flag("--unsafe", args.run.unsafe,
                "run solve/probe/study even when the certificate fails");
  sub->add_flag("--timings", args.run.timings,
                "include wall-clock timings in the report (non-reproducible)");
  if (with_seed) {
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&args](std::uint64_t s) { args.run.seed_override = s; },
        "override the probe seed from the config");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified solver for semilinear grid problems"};
  app.require_subcommand(1);

  CliArgs args;
  CLI::App* certify = app.add_subcommand("certify", "check the hypothesis constants");
  CLI::App* solve = app.add_subcommand("solve", "certify, then run the damped Newton solver");
  CLI::App* probe = app.add_subcommand("probe", "certify, then multistart for distinct solutions");
  CLI::App* study = app.add_subcommand("study", "certify, then run a refinement study");
  add_common(certify, args, false);
  add_common(solve, args, false);
  add_common(probe, args, true);
  add_common(study, args, false);

  CLI11_PARSE(app, argc, argv);
  for (CLI::App* sub : {certify, solve, probe, study})
    if (sub->parsed()) args.command = sub->get_name();

  try {
    const uniqcert::ProblemConfig cfg = uniqcert::load_config(args.config_path);
    const uniqcert::RunResult res =
        uniqcert::run_command(args.command, cfg, args.run);
    const std::string text = uniqcert::emit_report(res, args.run);
    if (args.run.out_path.empty()) std::cout << text;
    return res.exit_code;
  } catch (const uniqcert::ConfigError& e) {
    std::cerr << "config error:\n";
    for (const std::string& issue : e.issues()) std::cerr << "  - " << issue << "\n";
    return 1;
  } catch (const uniqcert::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
