#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailfuse/commands.hpp"

using tailfuse::RunConfig;

namespace {

struct Common {
  std::string config_file;
  std::string input;
  std::string out_dir;
  long seed = -1;
  long threads = -1;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "flat key = value configuration file");
  cmd->add_option("--input,-i", c.input, "input CSV (rows = observations, columns = clusters)");
  cmd->add_option("--out-dir,-o", c.out_dir, "output directory (default: out)");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--threads", c.threads, "worker cap, 0 = hardware");
  cmd->add_option("--set", c.sets, "override any config key, key=value")->take_all();
}

RunConfig build_config(const Common& c) {
  RunConfig config;
  if (!c.config_file.empty()) config.load_file(c.config_file);
  if (!c.input.empty()) config.set("input", c.input);
  if (!c.out_dir.empty()) config.set("out_dir", c.out_dir);
  if (c.seed >= 0) config.set("seed", std::to_string(c.seed));
  if (c.threads >= 0) config.set("threads", std::to_string(c.threads));
  for (const std::string& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set", "expected key=value, got " + kv);
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"peaks-over-threshold GPD fitting with graph-fused shape grouping"};
  app.require_subcommand(1);

  Common fit_c, sim_c, thr_c, graph_c, rl_c;
  CLI::App* fit = app.add_subcommand("fit", "threshold, build the graph, solve the path, report");
  add_common(fit, fit_c);
  CLI::App* sim = app.add_subcommand("simulate", "generate synthetic data and evaluate fits");
  add_common(sim, sim_c);
  sim->add_option("--preset", [&sim_c](const std::vector<std::string>& v) {
    sim_c.sets.push_back("sim.preset=" + v.front());
    return true;
  }, "scenario preset (s5-small, s5-full)");
  sim->add_option("--reps", [&sim_c](const std::vector<std::string>& v) {
    sim_c.sets.push_back("sim.reps=" + v.front());
    return true;
  }, "Monte Carlo replications (>= 2 to evaluate)");
  CLI::App* thr = app.add_subcommand("threshold", "QQ-risk path over k and MRL diagnostics");
  add_common(thr, thr_c);
  CLI::App* graph = app.add_subcommand("graph", "build and save the cluster graph");
  add_common(graph, graph_c);
  CLI::App* rl = app.add_subcommand("return-level", "return levels with CIs from a cluster table");
  add_common(rl, rl_c);
  rl->add_option("--tau", [&rl_c](const std::vector<std::string>& v) {
    rl_c.sets.push_back("rl.tau=" + v.front());
    return true;
  }, "comma-separated exceedance probabilities");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return tailfuse::cmd_fit(build_config(fit_c), std::cerr);
    if (sim->parsed()) return tailfuse::cmd_simulate(build_config(sim_c), std::cerr);
    if (thr->parsed()) return tailfuse::cmd_threshold(build_config(thr_c), std::cerr);
    if (graph->parsed()) return tailfuse::cmd_graph(build_config(graph_c), std::cerr);
    if (rl->parsed()) return tailfuse::cmd_return_level(build_config(rl_c), std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: input: " << e.what() << '\n';
    return tailfuse::kExitInputError;
  }
  return tailfuse::kExitInputError;
}
