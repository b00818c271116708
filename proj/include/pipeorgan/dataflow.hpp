#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pipeorgan/workload.hpp"

namespace pipeorgan {

// Loop order is outermost-first, one char per rank ("NHWKCRS", "MNK", ...).
// Tile sizes split a rank into extent/tile outer steps; the intra-tile loops sit
// innermost. Tiles must divide their extents so synchronization quanta stay exact.
struct Dataflow {
  int64_t layer_id = 0;
  std::string loop_order;
  std::map<char, int64_t> tile_sizes;
  std::map<char, int64_t> spatial_ranks;  // rank -> spatial factor

  int64_t tile(char rank) const;
  bool operator==(const Dataflow&) const = default;
};

void validate_dataflow(const Dataflow& df, const LayerNode& layer);

// Rank classification per kind. "Output" ranks index the produced tensor,
// "input" ranks index the consumed activation (halo folded into H,W),
// "contracted" ranks are reduced away, the "unshared" rank re-reads the whole
// input when hoisted outermost (CONV: K, GEMM: N).
std::string output_ranks(LayerKind kind);
std::string input_ranks(LayerKind kind);
std::string contracted_ranks(LayerKind kind);
std::string unshared_ranks(LayerKind kind);

// Producer-output rank paired with the consumer-input rank naming the same
// tensor dimension. CONV->CONV: (N,N)(H,H)(W,W)(K,C); GEMM->GEMM: (M,M)(N,K).
struct RankAliasMap {
  std::vector<std::pair<char, char>> pairs;

  bool aliased(char producer_rank, char consumer_rank) const;
  // consumer rank for a producer rank, or 0 when unpaired
  char consumer_of(char producer_rank) const;
};

RankAliasMap rank_alias_map(const LayerNode& producer, const LayerNode& consumer);

enum class PipeVerdict {
  OK,
  SAME_OUTERMOST_VIOLATED,
  CONTRACTED_OUTERMOST,
  UNSHARED_OUTERMOST,
};

std::string to_string(PipeVerdict verdict);

PipeVerdict check_pipelinable(const LayerNode& producer, const Dataflow& producer_df,
                              const LayerNode& consumer, const Dataflow& consumer_df,
                              const RankAliasMap& alias);

struct Granularity {
  int64_t elements = 0;  // intermediate-tensor elements exchanged per interval
  int64_t fused_loop_count = 0;
};

// Walk both loop orders outermost-in; while the rank pair at each position is
// aliased (and the previous position's tiles agree) the synchronization quantum
// shrinks by that extent and regrows by the lcm of the two tile sizes.
Granularity finest_granularity(const LayerNode& producer, const Dataflow& producer_df,
                               const LayerNode& consumer, const Dataflow& consumer_df,
                               const RankAliasMap& alias);

struct DataflowConfig {
  double theta_low = 1.0;
  double theta_high = 10.0;
  ActCounting act_counting = ActCounting::INPUT_ONLY;
};

// Weight-stationary below theta_low, fully activation-stationary above
// theta_high, hybrid between; boundaries resolve toward the activation side.
// buffer_bytes is reserved for tile sizing; order depends only on the shape.
Dataflow choose_intra_dataflow(const LayerNode& layer, int64_t buffer_bytes,
                               const DataflowConfig& config = {});

}  // namespace pipeorgan
