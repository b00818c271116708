#pragma once

#include <cstdint>
#include <string>

#include "pipeorgan/noc.hpp"
#include "pipeorgan/perf.hpp"
#include "pipeorgan/placement.hpp"

namespace pipeorgan {

struct RunConfig {
  std::string model_path;
  std::string arch_path;   // empty = defaults
  std::string out_dir = ".";
  TopoKind topology = TopoKind::MESH;
  PlanKind plan = PlanKind::PIPEORGAN;
  DelayModel delay_model = DelayModel::SERIALIZATION;
  std::string org_override;  // empty = heuristic choice
  int64_t stripe_override = 0;
  uint64_t seed = 0;         // PIPEORGAN_SEED; reserved for randomized tie-breaks
};

// Exit codes: 0 ok, 2 empty model, 1 anything else. All files are written to a
// temp name and renamed so partial output never lands under the final name.
int cmd_analyze(const RunConfig& run);
int cmd_map(const RunConfig& run);
int cmd_simulate(const RunConfig& run);
int cmd_report(const RunConfig& run);

}  // namespace pipeorgan
