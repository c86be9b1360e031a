#include <CLI11.hpp>

#include "fifotap/runner.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace {

void add_common(CLI::App* cmd, fifotap::RunOptions& opt,
                std::optional<std::uint64_t>& seed,
                std::optional<double>& dtau, std::optional<double>& tol) {
  cmd->add_option("scenario", opt.scenario_path, "Scenario JSON file")
      ->required();
  cmd->add_option("--out", opt.out_dir, "Output directory (default: .)");
  cmd->add_option("--seed", seed, "Override the scenario seed");
  cmd->add_option("--dtau", dtau, "Override the integration step");
  cmd->add_option("--tol", tol, "Override the convergence tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic equilibrium solver for route-flow dynamics"};
  app.require_subcommand(1);

  fifotap::RunOptions opt;
  std::optional<std::uint64_t> seed;
  std::optional<double> dtau;
  std::optional<double> tol;
  std::optional<int> max_perturb;
  std::string flows;
  double init_split = 0.5;
  bool have_init_split = false;
  int rc = 0;

  auto* st = app.add_subcommand("solve-static",
                                "Integrate the flow dynamics to equilibrium");
  add_common(st, opt, seed, dtau, tol);
  st->add_option("--flows", flows, "Initial route flows, comma separated");
  st->add_option("--max-perturb", max_perturb,
                 "Maximum pseudo-equilibrium perturbations");
  st->callback([&] {
    if (!flows.empty()) opt.flows = flows;
    opt.seed = seed;
    opt.delta_tau = dtau;
    opt.tol = tol;
    opt.max_perturb = max_perturb;
    rc = fifotap::run_solve_static(opt);
  });

  auto* el = app.add_subcommand("solve-elastic",
                                "Solve with demand responsive to travel time");
  add_common(el, opt, seed, dtau, tol);
  el->add_option("--flows", flows, "Initial route flows, comma separated");
  el->add_option("--max-perturb", max_perturb,
                 "Maximum pseudo-equilibrium perturbations");
  el->callback([&] {
    if (!flows.empty()) opt.flows = flows;
    opt.seed = seed;
    opt.delta_tau = dtau;
    opt.tol = tol;
    opt.max_perturb = max_perturb;
    rc = fifotap::run_solve_elastic(opt);
  });

  auto* dy = app.add_subcommand("solve-dynamic",
                                "Solve the within-day dynamic assignment");
  add_common(dy, opt, seed, dtau, tol);
  auto* split_opt = dy->add_option("--init-split", init_split,
                                   "Share of each bin on the first route");
  dy->add_flag("--random-start", opt.random_start,
               "Draw the starting profile from the scenario seed");
  dy->callback([&] {
    have_init_split = !split_opt->empty();
    if (have_init_split) opt.init_split = init_split;
    opt.seed = seed;
    opt.delta_tau = dtau;
    opt.tol = tol;
    rc = fifotap::run_solve_dynamic(opt);
  });

  auto* cl = app.add_subcommand("classify",
                                "Classify a flow pattern at equilibrium");
  add_common(cl, opt, seed, dtau, tol);
  cl->add_option("--flows", flows, "Route flows to classify, comma separated")
      ->required();
  cl->callback([&] {
    opt.flows = flows;
    opt.seed = seed;
    opt.delta_tau = dtau;
    opt.tol = tol;
    rc = fifotap::run_classify(opt);
  });

  auto* en = app.add_subcommand(
      "enumerate-equilibria",
      "Sweep start points and collect distinct equilibria");
  add_common(en, opt, seed, dtau, tol);
  en->add_option("--starts", opt.starts, "Number of start points to try");
  en->add_option("--max-perturb", max_perturb,
                 "Maximum pseudo-equilibrium perturbations");
  en->callback([&] {
    opt.seed = seed;
    opt.delta_tau = dtau;
    opt.tol = tol;
    opt.max_perturb = max_perturb;
    rc = fifotap::run_enumerate(opt);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return rc;
}
