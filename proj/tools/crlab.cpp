// crlab: spectra, single benchmarks, memory capacity and grid sweeps for
// cycle and concentric reservoirs.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "crlab/cli.hpp"

namespace {

void add_model_flags(CLI::App* cmd, crlab::cli::RunOptions& o) {
  cmd->add_option("--model", o.model, "SCR, CRJ, cESN, cjESN or randomESN")->capture_default_str();
  cmd->add_option("--topology", o.topology, "cycle lengths n1-n2-..., outermost first")->capture_default_str();
  cmd->add_option("--wc", o.w_c, "cycle weight(s); for randomESN the spectral radius")
      ->delimiter(',')->capture_default_str();
  cmd->add_option("--wj", o.w_j, "jump weight(s)")->delimiter(',')->capture_default_str();
  cmd->add_option("--tau", o.tau, "jump step(s)")->delimiter(',')->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "leak rate(s)")->delimiter(',')->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "ridge parameter")->delimiter(',')->capture_default_str();
  cmd->add_option("--input-scale", o.input_scale, "input weight magnitude(s)")
      ->delimiter(',')->capture_default_str();
  cmd->add_option("--connectivity", o.connectivity, "randomESN connection probability")->capture_default_str();
  cmd->add_option("--esn-seed", o.esn_seed, "randomESN reservoir seed")->capture_default_str();
}

void add_task_flags(CLI::App* cmd, crlab::cli::RunOptions& o) {
  cmd->add_option("--task", o.task, "narma (generated) or file (next-value prediction on --data)")
      ->capture_default_str();
  cmd->add_option("--data", o.data, "series file: one number per line, '#' comments");
  cmd->add_option("--washout", o.washout, "states dropped at the start of each segment")->capture_default_str();
  cmd->add_option("--state-mode", o.state_mode, "reset or continuous")
      ->check(CLI::IsMember({"reset", "continuous"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using crlab::cli::RunOptions;
  CLI::App app{"Cycle and concentric echo state network toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CRLAB_VERSION);

  RunOptions opt;
  std::string manifest;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", opt.out, "output path")->required();
    cmd->add_option("--seed", opt.seed, "data seed")->capture_default_str();
  };

  auto* eigen = app.add_subcommand("eigen", "write reservoir eigenvalues as CSV (re,im)");
  add_common(eigen);
  eigen->add_option("--topology", opt.topology, "cycle lengths n1-n2-...")->capture_default_str();
  eigen->add_option("--wc", opt.w_c, "one cycle weight, or one per cycle")->delimiter(',');
  eigen->add_option("--wj", opt.w_j, "jump weight")->delimiter(',');
  eigen->add_option("--tau", opt.tau, "jump step")->delimiter(',');
  eigen->add_flag("--jumps", opt.jumps, "add jump connections");

  auto* bench = app.add_subcommand("bench", "run one configuration on a prediction task");
  add_common(bench);
  add_model_flags(bench, opt);
  add_task_flags(bench, opt);

  auto* mc = app.add_subcommand("mc", "estimate memory capacity (best over listed values)");
  add_common(mc);
  add_model_flags(mc, opt);
  mc->add_option("--kmax", opt.kmax, "largest delay")->capture_default_str();
  mc->add_option("--data", opt.data, "input stream file; generated i.i.d. uniform when omitted");
  mc->add_option("--train", opt.mc_train, "training samples")->capture_default_str();
  mc->add_option("--test", opt.mc_test, "test samples")->capture_default_str();
  mc->add_option("--washout", opt.mc_washout, "training states dropped")->capture_default_str();
  mc->add_option("--workers", opt.workers, "parallel evaluations")->capture_default_str();

  auto* grid = app.add_subcommand("grid", "grid search with validation-based selection");
  add_common(grid);
  add_task_flags(grid, opt);
  grid->add_option("--grid", opt.grid, "grid specification (JSON)");
  grid->add_option("--preset", opt.preset, "fast or full, when no --grid is given")
      ->check(CLI::IsMember({"fast", "full"}));
  grid->add_option("--sizes", opt.sizes, "restrict reservoir sizes")->delimiter(',');
  grid->add_option("--models", opt.models, "restrict model kinds")->delimiter(',');
  grid->add_option("--workers", opt.workers, "worker threads")->capture_default_str();

  auto* rerun = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  rerun->add_option("manifest", manifest, "manifest JSON")->required();
  rerun->add_option("--out", opt.out, "write to a different output path");

  // Defaults that differ per command.
  mc->preparse_callback([&](std::size_t) {
    opt.lambda = {1e-9};
    opt.w_c = {0.9};
  });

  CLI11_PARSE(app, argc, argv);

  try {
    if (rerun->parsed()) {
      crlab::cli::replay(manifest, opt.out);
    } else {
      opt.command = app.get_subcommands().front()->get_name();
      crlab::cli::run(opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "crlab: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
