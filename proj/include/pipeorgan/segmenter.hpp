#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pipeorgan/dataflow.hpp"
#include "pipeorgan/workload.hpp"

namespace pipeorgan {

enum class CutReason { FOOTPRINT, COMPLEX_LAYER, MAX_DEPTH, END_OF_MODEL };

std::string to_string(CutReason reason);

struct FootprintReport {
  int64_t act_bytes = 0;     // first input + last output + crossing skip activations
  int64_t weight_bytes = 0;  // resident weights of all layers in the window
};

// Footprints of the window [first, first+depth). A skip activation counts when
// exactly one endpoint lies inside the window (it must then live in DRAM/GB).
FootprintReport footprints(const ModelGraph& graph, int64_t first, int64_t depth);

struct PairDecision {
  PipeVerdict verdict = PipeVerdict::OK;
  Granularity granularity;
};

struct PipelineSegment {
  int64_t first = 0;
  int64_t depth = 1;
  CutReason cut_reason = CutReason::END_OF_MODEL;
  std::vector<Dataflow> dataflows;     // one per layer; empty order for COMPLEX
  std::vector<PairDecision> pairs;     // depth-1 entries
};

struct SegmenterConfig {
  int64_t num_pes = 1024;
  int64_t sram_bytes = 1 << 20;
  DataflowConfig dataflow;
};

// Greedy depth growth: extend while resident weights stay within the activation
// footprint, stopping at COMPLEX layers, floor(sqrt(num_pes)), or the model end.
// The first failing depth is never taken; depth never drops below 1.
std::vector<PipelineSegment> segment_model(const ModelGraph& graph,
                                           const SegmenterConfig& config);

int64_t max_pipeline_depth(int64_t num_pes);

// Verdict plus quantum for one producer/consumer pair; non-pipelinable or
// non-chaining pairs fall back to exchanging the whole intermediate tensor.
PairDecision decide_pair(const LayerNode& producer, const Dataflow& producer_df,
                         const LayerNode& consumer, const Dataflow& consumer_df);

}  // namespace pipeorgan
