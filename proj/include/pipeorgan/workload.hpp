#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pipeorgan {

enum class LayerKind { CONV, DWCONV, GEMM, COMPLEX };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

// One operator of the model. CONV/DWCONV carry ranks N,H,W,K,C,R,S; GEMM carries
// M,N,K. COMPLEX is an opaque marker (ROIAlign and friends): no dims, never mapped,
// only cuts pipeline segments.
struct LayerNode {
  int64_t id = 0;
  LayerKind kind = LayerKind::CONV;
  std::map<char, int64_t> dims;
  int64_t groups = 1;
  int64_t bytes_per_element = 1;

  int64_t dim(char rank) const;
  bool operator==(const LayerNode&) const = default;
};

enum class TensorRole { INPUT_ACT, OUTPUT_ACT, WEIGHT };

struct TensorInfo {
  TensorRole role = TensorRole::INPUT_ACT;
  int64_t volume = 0;  // elements
  int64_t bytes = 0;
};

// Input activations count the halo: a CONV reads (H+R-1)x(W+S-1) per channel.
TensorInfo tensor_info(const LayerNode& layer, TensorRole role);

// Sequential chain in list order plus explicit skip edges (src, dst) with
// dst at least two positions downstream. Indices are positions in `layers`.
struct ModelGraph {
  std::vector<LayerNode> layers;
  std::vector<std::pair<int64_t, int64_t>> skip_edges;

  bool operator==(const ModelGraph&) const = default;
};

struct SkipEdgeInfo {
  int64_t src = 0;
  int64_t dst = 0;
  int64_t reuse_distance = 0;  // dst - src, in layers
};

struct SkipProfile {
  std::vector<SkipEdgeInfo> edges;
  double density = 0.0;  // skip edges per layer
  std::vector<int64_t> in_degree;  // sequential edge + incoming skips, per layer
};

ModelGraph parse_model(const std::string& path);
ModelGraph parse_model_text(const std::string& text);
std::string serialize_model(const ModelGraph& graph);
void validate_model(const ModelGraph& graph);

// MACs actually executed; grouped convolutions only touch their own group.
int64_t mac_count(const LayerNode& layer);

enum class ActCounting { INPUT_ONLY, INPUT_PLUS_OUTPUT };

// Activation-to-weight volume ratio steering dataflow choice.
double aw_ratio(const LayerNode& layer, ActCounting counting = ActCounting::INPUT_ONLY);

SkipProfile skip_profile(const ModelGraph& graph);

}  // namespace pipeorgan
