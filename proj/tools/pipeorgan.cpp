#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "pipeorgan/cli.hpp"

using namespace pipeorgan;

int main(int argc, char** argv) {
  CLI::App app{"pipeline mapper and NoC simulator for DNN accelerators"};
  app.require_subcommand(1);

  RunConfig run;
  if (const char* seed = std::getenv("PIPEORGAN_SEED")) run.seed = std::strtoull(seed, nullptr, 10);

  std::map<std::string, TopoKind> topo_names{{"mesh", TopoKind::MESH}, {"amp", TopoKind::AMP}};
  std::map<std::string, PlanKind> plan_names{{"pipeorgan", PlanKind::PIPEORGAN},
                                             {"tangram", PlanKind::TANGRAM_LIKE},
                                             {"simba", PlanKind::SIMBA_LIKE}};
  std::map<std::string, DelayModel> delay_names{{"serialization", DelayModel::SERIALIZATION},
                                                {"paper-literal", DelayModel::PAPER_LITERAL}};

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--model", run.model_path, "model graph JSON")->required();
    cmd->add_option("--arch", run.arch_path, "architecture JSON (defaults when omitted)");
    cmd->add_option("--out", run.out_dir, "output directory");
    cmd->add_option("--topology", run.topology, "NoC topology")
        ->transform(CLI::CheckedTransformer(topo_names, CLI::ignore_case));
    cmd->add_option("--plan", run.plan, "mapping policy")
        ->transform(CLI::CheckedTransformer(plan_names, CLI::ignore_case));
    cmd->add_option("--delay-model", run.delay_model, "per-interval delay model")
        ->transform(CLI::CheckedTransformer(delay_names, CLI::ignore_case));
    cmd->add_option("--org", run.org_override,
                    "force organization: blocked1d, blocked2d, fine-striped, checkerboard, "
                    "sequential, gb");
    cmd->add_option("--stripe", run.stripe_override, "stripe width for --org fine-striped");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "pipeline depth and quantum per layer");
  CLI::App* map_cmd = app.add_subcommand("map", "spatial placement of each segment");
  CLI::App* simulate = app.add_subcommand("simulate", "link loads and the congestion sweep");
  CLI::App* report = app.add_subcommand("report", "cross-policy comparison");
  for (CLI::App* cmd : {analyze, map_cmd, simulate, report}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(run);
    if (map_cmd->parsed()) return cmd_map(run);
    if (simulate->parsed()) return cmd_simulate(run);
    return cmd_report(run);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
