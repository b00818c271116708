#include "pipeorgan/dataflow.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pipeorgan {

int64_t Dataflow::tile(char rank) const {
  auto it = tile_sizes.find(rank);
  return it == tile_sizes.end() ? 1 : it->second;
}

std::string output_ranks(LayerKind kind) {
  switch (kind) {
    case LayerKind::CONV:
    case LayerKind::DWCONV: return "NHWK";
    case LayerKind::GEMM: return "MN";
    case LayerKind::COMPLEX: return "";
  }
  throw std::logic_error("bad LayerKind");
}

std::string input_ranks(LayerKind kind) {
  switch (kind) {
    case LayerKind::CONV:
    case LayerKind::DWCONV: return "NHWC";
    case LayerKind::GEMM: return "MK";
    case LayerKind::COMPLEX: return "";
  }
  throw std::logic_error("bad LayerKind");
}

std::string contracted_ranks(LayerKind kind) {
  switch (kind) {
    case LayerKind::CONV:
    case LayerKind::DWCONV: return "CRS";
    case LayerKind::GEMM: return "K";
    case LayerKind::COMPLEX: return "";
  }
  throw std::logic_error("bad LayerKind");
}

std::string unshared_ranks(LayerKind kind) {
  switch (kind) {
    case LayerKind::CONV:
    case LayerKind::DWCONV: return "K";
    case LayerKind::GEMM: return "N";
    case LayerKind::COMPLEX: return "";
  }
  throw std::logic_error("bad LayerKind");
}

static std::string all_ranks(LayerKind kind) {
  return kind == LayerKind::GEMM ? "MNK" : "NHWKCRS";
}

void validate_dataflow(const Dataflow& df, const LayerNode& layer) {
  std::string where = "dataflow for layer " + std::to_string(layer.id);
  if (layer.kind == LayerKind::COMPLEX) {
    if (!df.loop_order.empty()) throw std::invalid_argument(where + ": COMPLEX has no loops");
    return;
  }
  std::string want = all_ranks(layer.kind);
  std::string sorted_order = df.loop_order;
  std::string sorted_want = want;
  std::sort(sorted_order.begin(), sorted_order.end());
  std::sort(sorted_want.begin(), sorted_want.end());
  if (sorted_order != sorted_want)
    throw std::invalid_argument(where + ": loop order '" + df.loop_order +
                                "' is not a permutation of " + want);
  for (auto& [rank, tile] : df.tile_sizes) {
    if (want.find(rank) == std::string::npos)
      throw std::invalid_argument(where + ": tile on unknown rank " + std::string(1, rank));
    int64_t extent = layer.dim(rank);
    if (tile < 1 || tile > extent)
      throw std::invalid_argument(where + ": tile of rank " + std::string(1, rank) +
                                  " outside [1, extent]");
    if (extent % tile != 0)
      throw std::invalid_argument(where + ": tile of rank " + std::string(1, rank) +
                                  " must divide extent " + std::to_string(extent));
  }
  for (auto& [rank, factor] : df.spatial_ranks) {
    if (want.find(rank) == std::string::npos || factor < 1)
      throw std::invalid_argument(where + ": bad spatial factor on rank " + std::string(1, rank));
  }
}

bool RankAliasMap::aliased(char producer_rank, char consumer_rank) const {
  for (auto& [p, c] : pairs)
    if (p == producer_rank && c == consumer_rank) return true;
  return false;
}

char RankAliasMap::consumer_of(char producer_rank) const {
  for (auto& [p, c] : pairs)
    if (p == producer_rank) return c;
  return 0;
}

RankAliasMap rank_alias_map(const LayerNode& producer, const LayerNode& consumer) {
  if (producer.kind == LayerKind::COMPLEX || consumer.kind == LayerKind::COMPLEX)
    throw std::invalid_argument("COMPLEX layers do not alias tensors");

  std::string out = output_ranks(producer.kind);
  std::string in = input_ranks(consumer.kind);

  int64_t out_volume = tensor_info(producer, TensorRole::OUTPUT_ACT).volume;
  // Consumer-side volume without the halo: output coordinates name the tensor.
  int64_t in_volume = 1;
  for (char rank : in) in_volume *= consumer.dim(rank);
  if (out_volume != in_volume)
    throw std::invalid_argument(
        "shape mismatch: producer " + std::to_string(producer.id) + " emits " +
        std::to_string(out_volume) + " elements, consumer " + std::to_string(consumer.id) +
        " reads " + std::to_string(in_volume));

  RankAliasMap alias;
  if (out.size() == in.size()) {
    for (size_t i = 0; i < out.size(); ++i) {
      if (producer.dim(out[i]) != consumer.dim(in[i]))
        throw std::invalid_argument("shape mismatch: rank " + std::string(1, out[i]) + "=" +
                                    std::to_string(producer.dim(out[i])) + " of layer " +
                                    std::to_string(producer.id) + " vs rank " +
                                    std::string(1, in[i]) + "=" +
                                    std::to_string(consumer.dim(in[i])) + " of layer " +
                                    std::to_string(consumer.id));
      alias.pairs.emplace_back(out[i], in[i]);
    }
    return alias;
  }

  // Unequal rank counts (CONV feeding GEMM or back): pair from the innermost
  // end while extents agree; outer ranks that flatten across stay unpaired.
  auto po = out.rbegin();
  auto ci = in.rbegin();
  while (po != out.rend() && ci != in.rend() && producer.dim(*po) == consumer.dim(*ci)) {
    alias.pairs.emplace_back(*po, *ci);
    ++po;
    ++ci;
  }
  std::reverse(alias.pairs.begin(), alias.pairs.end());
  return alias;
}

PipeVerdict check_pipelinable(const LayerNode& producer, const Dataflow& producer_df,
                              const LayerNode& consumer, const Dataflow& consumer_df,
                              const RankAliasMap& alias) {
  validate_dataflow(producer_df, producer);
  validate_dataflow(consumer_df, consumer);
  char p0 = producer_df.loop_order.at(0);
  char c0 = consumer_df.loop_order.at(0);
  if (contracted_ranks(producer.kind).find(p0) != std::string::npos)
    return PipeVerdict::CONTRACTED_OUTERMOST;
  if (unshared_ranks(consumer.kind).find(c0) != std::string::npos)
    return PipeVerdict::UNSHARED_OUTERMOST;
  if (!alias.aliased(p0, c0)) return PipeVerdict::SAME_OUTERMOST_VIOLATED;
  return PipeVerdict::OK;
}

std::string to_string(PipeVerdict verdict) {
  switch (verdict) {
    case PipeVerdict::OK: return "OK";
    case PipeVerdict::SAME_OUTERMOST_VIOLATED: return "SAME_OUTERMOST_VIOLATED";
    case PipeVerdict::CONTRACTED_OUTERMOST: return "CONTRACTED_OUTERMOST";
    case PipeVerdict::UNSHARED_OUTERMOST: return "UNSHARED_OUTERMOST";
  }
  throw std::logic_error("bad PipeVerdict");
}

Granularity finest_granularity(const LayerNode& producer, const Dataflow& producer_df,
                               const LayerNode& consumer, const Dataflow& consumer_df,
                               const RankAliasMap& alias) {
  validate_dataflow(producer_df, producer);
  validate_dataflow(consumer_df, consumer);

  Granularity g;
  g.elements = tensor_info(producer, TensorRole::OUTPUT_ACT).volume;
  g.fused_loop_count = 0;

  size_t depth = std::min(producer_df.loop_order.size(), consumer_df.loop_order.size());
  for (size_t i = 0; i < depth; ++i) {
    char p = producer_df.loop_order[i];
    char c = consumer_df.loop_order[i];
    if (!alias.aliased(p, c)) break;
    if (i > 0) {
      char pp = producer_df.loop_order[i - 1];
      char pc = consumer_df.loop_order[i - 1];
      if (producer_df.tile(pp) != consumer_df.tile(pc)) break;
    }
    int64_t quantum = std::lcm(producer_df.tile(p), consumer_df.tile(c));
    g.elements = g.elements / producer.dim(p) * quantum;
    g.fused_loop_count += 1;
  }
  return g;
}

Dataflow choose_intra_dataflow(const LayerNode& layer, int64_t buffer_bytes,
                               const DataflowConfig& config) {
  (void)buffer_bytes;
  Dataflow df;
  df.layer_id = layer.id;
  if (layer.kind == LayerKind::COMPLEX) return df;

  double ratio = aw_ratio(layer, config.act_counting);
  bool gemm = layer.kind == LayerKind::GEMM;
  if (ratio < config.theta_low) {
    df.loop_order = gemm ? "NKM" : "KCRSNHW";  // weights parked outermost
  } else if (ratio < config.theta_high) {
    df.loop_order = gemm ? "MKN" : "NHKCWRS";  // partial weight reuse
  } else {
    df.loop_order = gemm ? "MNK" : "NHWKCRS";  // activations stream finest
  }
  return df;
}

}  // namespace pipeorgan
