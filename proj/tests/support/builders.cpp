#include "builders.hpp"

#include <algorithm>

namespace pipeorgan::testing {

LayerNode conv_layer(int64_t id, int64_t n, int64_t h, int64_t w, int64_t k, int64_t c,
                     int64_t r, int64_t s, int64_t groups, int64_t bytes) {
  LayerNode layer;
  layer.id = id;
  layer.kind = groups == c && groups == k && groups > 1 ? LayerKind::DWCONV : LayerKind::CONV;
  layer.dims = {{'N', n}, {'H', h}, {'W', w}, {'K', k}, {'C', c}, {'R', r}, {'S', s}};
  layer.groups = groups;
  layer.bytes_per_element = bytes;
  return layer;
}

LayerNode gemm_layer(int64_t id, int64_t m, int64_t n, int64_t k, int64_t bytes) {
  LayerNode layer;
  layer.id = id;
  layer.kind = LayerKind::GEMM;
  layer.dims = {{'M', m}, {'N', n}, {'K', k}};
  layer.bytes_per_element = bytes;
  return layer;
}

LayerNode complex_layer(int64_t id) {
  LayerNode layer;
  layer.id = id;
  layer.kind = LayerKind::COMPLEX;
  return layer;
}

ModelGraph conv_chain(int64_t layers, int64_t h, int64_t k, int64_t r) {
  ModelGraph graph;
  for (int64_t i = 0; i < layers; ++i)
    graph.layers.push_back(conv_layer(i, 1, h, h, k, k, r, r));
  return graph;
}

ModelGraph gemm_chain(int64_t layers, int64_t m, int64_t width) {
  ModelGraph graph;
  for (int64_t i = 0; i < layers; ++i)
    graph.layers.push_back(gemm_layer(i, m, width, width));
  return graph;
}

Dataflow make_dataflow(int64_t layer_id, std::string order,
                       std::vector<std::pair<char, int64_t>> tiles) {
  Dataflow df;
  df.layer_id = layer_id;
  df.loop_order = std::move(order);
  for (auto& [rank, tile] : tiles) df.tile_sizes[rank] = tile;
  return df;
}

int64_t random_tile(Rng& rng, int64_t extent, int64_t cap) {
  std::vector<int64_t> divisors;
  for (int64_t d = 1; d <= std::min(extent, cap); ++d)
    if (extent % d == 0) divisors.push_back(d);
  return divisors[rng.pick(0, static_cast<int64_t>(divisors.size()) - 1)];
}

namespace {

std::string shuffled_suffix(Rng& rng, std::string shared, std::string rest) {
  std::shuffle(rest.begin(), rest.end(), rng.gen);
  return shared + rest;
}

}  // namespace

RandomPair random_pipelinable_pair(Rng& rng) {
  RandomPair pair;
  if (rng.coin()) {
    int64_t n = rng.pick(1, 2);
    int64_t h = rng.pick(2, 8);
    int64_t w = rng.pick(2, 8);
    int64_t k = rng.pick(1, 8);
    int64_t c = rng.pick(1, 8);
    int64_t r = rng.pick(1, 3);
    int64_t s = rng.pick(1, 3);
    pair.producer = conv_layer(0, n, h, w, k, c, r, s);
    pair.consumer = conv_layer(1, n, h, w, rng.pick(1, 8), k, r, s);
    // Shared prefix from {N,H,W} on the producer paired with the identical
    // consumer rank; producer K aliases consumer C and may close the prefix.
    std::string spatial = "NHW";
    std::shuffle(spatial.begin(), spatial.end(), rng.gen);
    int64_t shared = rng.pick(1, 3);
    std::string p_shared = spatial.substr(0, shared);
    std::string c_shared = p_shared;
    if (rng.coin()) {
      p_shared += 'K';
      c_shared += 'C';
    }
    auto leftover = [](const std::string& used, const std::string& all) {
      std::string rest;
      for (char rank : all)
        if (used.find(rank) == std::string::npos) rest += rank;
      return rest;
    };
    pair.pdf.layer_id = 0;
    pair.cdf.layer_id = 1;
    // The shared prefix holds only paired ranks, so the producer's contracted
    // ranks and the consumer's unshared K land strictly inside: both orders
    // open with a shared loop and the pair is pipelinable by construction.
    pair.pdf.loop_order = shuffled_suffix(rng, p_shared, leftover(p_shared, "NHWKCRS"));
    pair.cdf.loop_order = shuffled_suffix(rng, c_shared, leftover(c_shared, "NHWKCRS"));
    for (char rank : std::string("NHWKCRS")) {
      pair.pdf.tile_sizes[rank] = random_tile(rng, pair.producer.dim(rank), 4);
      pair.cdf.tile_sizes[rank] = random_tile(rng, pair.consumer.dim(rank), 4);
    }
  } else {
    int64_t m = rng.pick(1, 8);
    int64_t n = rng.pick(1, 8);
    pair.producer = gemm_layer(0, m, n, rng.pick(1, 8));
    pair.consumer = gemm_layer(1, m, rng.pick(1, 8), n);
    pair.pdf.layer_id = 0;
    pair.cdf.layer_id = 1;
    // M opens both orders, so every combination is pipelinable; MNK against
    // MKN can fuse two loops, the rest stop after the shared M.
    pair.pdf.loop_order = rng.coin() ? "MNK" : "MKN";
    pair.cdf.loop_order = rng.coin() ? "MKN" : "MNK";
    for (char rank : std::string("MNK")) {
      pair.pdf.tile_sizes[rank] = random_tile(rng, pair.producer.dim(rank), 4);
      pair.cdf.tile_sizes[rank] = random_tile(rng, pair.consumer.dim(rank), 4);
    }
  }
  return pair;
}

}  // namespace pipeorgan::testing
