#pragma once

#include <string>

#include "pipeorgan/noc.hpp"
#include "pipeorgan/placement.hpp"

namespace pipeorgan {

// Deterministic hand-rolled SVG, no timestamps, fixed number formatting.
std::string link_heatmap_svg(const Topology& topo, const LoadReport& load);
std::string placement_svg(const Placement& placement);

}  // namespace pipeorgan
