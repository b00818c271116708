#include "pipeorgan/segmenter.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace pipeorgan {

std::string to_string(CutReason reason) {
  switch (reason) {
    case CutReason::FOOTPRINT: return "FOOTPRINT";
    case CutReason::COMPLEX_LAYER: return "COMPLEX_LAYER";
    case CutReason::MAX_DEPTH: return "MAX_DEPTH";
    case CutReason::END_OF_MODEL: return "END_OF_MODEL";
  }
  throw std::logic_error("bad CutReason");
}

int64_t max_pipeline_depth(int64_t num_pes) {
  if (num_pes < 1) throw std::invalid_argument("num_pes must be >= 1");
  return static_cast<int64_t>(std::sqrt(static_cast<double>(num_pes)));
}

FootprintReport footprints(const ModelGraph& graph, int64_t first, int64_t depth) {
  int64_t n = static_cast<int64_t>(graph.layers.size());
  if (first < 0 || depth < 1 || first + depth > n)
    throw std::invalid_argument("footprint window [" + std::to_string(first) + ", " +
                                std::to_string(first + depth) + ") outside model of " +
                                std::to_string(n) + " layers");
  FootprintReport fp;
  for (int64_t i = first; i < first + depth; ++i) {
    const LayerNode& layer = graph.layers[i];
    if (layer.kind == LayerKind::COMPLEX) continue;
    fp.weight_bytes += tensor_info(layer, TensorRole::WEIGHT).bytes;
  }
  auto inside = [&](int64_t i) { return i >= first && i < first + depth; };
  if (graph.layers[first].kind != LayerKind::COMPLEX)
    fp.act_bytes += tensor_info(graph.layers[first], TensorRole::INPUT_ACT).bytes;
  if (graph.layers[first + depth - 1].kind != LayerKind::COMPLEX)
    fp.act_bytes += tensor_info(graph.layers[first + depth - 1], TensorRole::OUTPUT_ACT).bytes;
  for (auto& [src, dst] : graph.skip_edges) {
    if (inside(src) == inside(dst)) continue;
    if (graph.layers[src].kind == LayerKind::COMPLEX) continue;
    fp.act_bytes += tensor_info(graph.layers[src], TensorRole::OUTPUT_ACT).bytes;
  }
  return fp;
}

PairDecision decide_pair(const LayerNode& producer, const Dataflow& pdf,
                         const LayerNode& consumer, const Dataflow& cdf) {
  PairDecision d;
  int64_t out_volume = tensor_info(producer, TensorRole::OUTPUT_ACT).volume;
  try {
    RankAliasMap alias = rank_alias_map(producer, consumer);
    d.verdict = check_pipelinable(producer, pdf, consumer, cdf, alias);
    if (d.verdict == PipeVerdict::OK) {
      d.granularity = finest_granularity(producer, pdf, consumer, cdf, alias);
      return d;
    }
  } catch (const std::invalid_argument&) {
    // Shapes do not chain; fall through to whole-tensor exchange.
    d.verdict = PipeVerdict::SAME_OUTERMOST_VIOLATED;
  }
  d.granularity = {out_volume, 0};
  return d;
}

std::vector<PipelineSegment> segment_model(const ModelGraph& graph,
                                           const SegmenterConfig& config) {
  if (graph.layers.empty()) throw std::invalid_argument("model has no layers");
  validate_model(graph);

  int64_t n = static_cast<int64_t>(graph.layers.size());
  int64_t depth_cap = max_pipeline_depth(config.num_pes);
  std::vector<PipelineSegment> segments;

  for (int64_t first = 0; first < n;) {
    PipelineSegment seg;
    seg.first = first;

    if (graph.layers[first].kind == LayerKind::COMPLEX) {
      seg.depth = 1;
      seg.cut_reason = CutReason::COMPLEX_LAYER;
    } else {
      int64_t depth = 1;
      for (;;) {
        FootprintReport fp = footprints(graph, first, depth);
        if (fp.weight_bytes > fp.act_bytes) {
          depth = std::max<int64_t>(depth - 1, 1);
          seg.cut_reason = CutReason::FOOTPRINT;
          break;
        }
        if (first + depth == n) {
          seg.cut_reason = CutReason::END_OF_MODEL;
          break;
        }
        if (graph.layers[first + depth].kind == LayerKind::COMPLEX) {
          seg.cut_reason = CutReason::COMPLEX_LAYER;
          break;
        }
        if (depth == depth_cap) {
          seg.cut_reason = CutReason::MAX_DEPTH;
          break;
        }
        ++depth;
      }
      seg.depth = depth;
    }

    for (int64_t i = seg.first; i < seg.first + seg.depth; ++i)
      seg.dataflows.push_back(
          choose_intra_dataflow(graph.layers[i], config.sram_bytes, config.dataflow));
    for (int64_t i = 0; i + 1 < seg.depth; ++i)
      seg.pairs.push_back(decide_pair(graph.layers[seg.first + i], seg.dataflows[i],
                                      graph.layers[seg.first + i + 1], seg.dataflows[i + 1]));

    first += seg.depth;
    segments.push_back(std::move(seg));
  }
  return segments;
}

}  // namespace pipeorgan
