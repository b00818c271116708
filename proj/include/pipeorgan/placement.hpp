#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pipeorgan/segmenter.hpp"
#include "pipeorgan/workload.hpp"

namespace pipeorgan {

struct ArchConfig {
  int64_t rows = 32;
  int64_t cols = 32;
  int64_t dot_width = 8;        // MACs per PE per cycle; no reduction for grouped convs
  int64_t rf_per_pe = 256;      // bytes
  int64_t sram_bytes = 1 << 20;
  int64_t dram_bw = 256;        // bytes per cycle (256 GB/s at 1 GHz)
  int64_t bytes_per_word = 1;
  int64_t link_flit_bytes = 16;
  int64_t amp_link_len = 0;     // 0 = round(sqrt(rows/2))

  int64_t num_pes() const { return rows * cols; }
};

ArchConfig parse_arch(const std::string& path);
ArchConfig parse_arch_text(const std::string& text);

enum class OrgStrategy {
  BLOCKED_1D,
  BLOCKED_2D,
  FINE_STRIPED_1D,
  CHECKERBOARD_2D,
  SEQUENTIAL,
  GB_BLOCKED,
};

std::string to_string(OrgStrategy strategy);

// PE shares proportional to per-layer MACs, largest-remainder rounding,
// every layer at least one PE. COMPLEX layers take the whole array alone.
std::vector<int64_t> allocate_pes(const ModelGraph& graph, const PipelineSegment& segment,
                                  int64_t num_pes);

struct OrgChoice {
  OrgStrategy strategy = OrgStrategy::BLOCKED_1D;
  int64_t stripe_width = 1;
};

// Granularity against register-file capacity decides the spatial organization:
// spill to the global buffer when the producer RF pool cannot hold one
// quantum, fine interleave when one PE's RF holds it whole, full blocks when
// it takes every producer PE, striping at ceil(G/rf) PEs between.
OrgChoice choose_organization(const ModelGraph& graph, const PipelineSegment& segment,
                              const std::vector<int64_t>& pe_counts,
                              const ArchConfig& config);

struct Placement {
  int64_t rows = 0;
  int64_t cols = 0;
  OrgChoice org;
  bool fallback = false;            // strategy was not realizable; blocked used
  std::vector<int64_t> owner;       // row-major PE -> layer position, -1 idle
  std::vector<std::vector<int64_t>> layer_pes;  // layer position -> PE ids, coordinate order

  int64_t pe_id(int64_t row, int64_t col) const { return row * cols + col; }
};

Placement realize_placement(const OrgChoice& org, const std::vector<int64_t>& pe_counts,
                            const ArchConfig& config);

enum class PlanKind { PIPEORGAN, TANGRAM_LIKE, SIMBA_LIKE };

std::string to_string(PlanKind kind);

struct SegmentPlan {
  PipelineSegment segment;
  std::vector<int64_t> pe_counts;
  OrgChoice org;
  Placement placement;
  // Quanta recomputed after placement with the realized tile sizes; spatial
  // partitioning leaves temporal tiles alone, so these normally match stage 1.
  std::vector<Granularity> realized;
};

struct PipelinePlan {
  PlanKind kind = PlanKind::PIPEORGAN;
  std::vector<SegmentPlan> segments;
};

// PIPEORGAN: segmenter + organization heuristics. TANGRAM_LIKE: fixed depth 2,
// blocked, alternating output-/input-stationary orders. SIMBA_LIKE: channel
// parallelism first, pipelining only when C*K cannot fill the array.
PipelinePlan build_plan(const ModelGraph& graph, const ArchConfig& config, PlanKind kind);

PipelinePlan baseline_plan(const ModelGraph& graph, const ArchConfig& config, PlanKind kind);

}  // namespace pipeorgan
