#include "pipeorgan/workload.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pipeorgan {

using nlohmann::json;

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::CONV: return "CONV";
    case LayerKind::DWCONV: return "DWCONV";
    case LayerKind::GEMM: return "GEMM";
    case LayerKind::COMPLEX: return "COMPLEX";
  }
  throw std::logic_error("bad LayerKind");
}

LayerKind layer_kind_from_string(const std::string& name) {
  if (name == "CONV") return LayerKind::CONV;
  if (name == "DWCONV") return LayerKind::DWCONV;
  if (name == "GEMM") return LayerKind::GEMM;
  if (name == "COMPLEX") return LayerKind::COMPLEX;
  throw std::invalid_argument("unknown layer kind '" + name + "'");
}

int64_t LayerNode::dim(char rank) const {
  auto it = dims.find(rank);
  if (it == dims.end())
    throw std::invalid_argument("layer " + std::to_string(id) + " has no rank '" +
                                std::string(1, rank) + "'");
  return it->second;
}

static const char* kConvRanks = "NHWKCRS";
static const char* kGemmRanks = "MNK";

static void check_layer(const LayerNode& layer) {
  std::string where = "layer " + std::to_string(layer.id);
  if (layer.bytes_per_element < 1)
    throw std::invalid_argument(where + ": bytes_per_element must be >= 1");
  if (layer.groups < 1) throw std::invalid_argument(where + ": groups must be >= 1");

  if (layer.kind == LayerKind::COMPLEX) {
    if (!layer.dims.empty())
      throw std::invalid_argument(where + ": COMPLEX layers carry no dims");
    return;
  }

  const char* ranks = layer.kind == LayerKind::GEMM ? kGemmRanks : kConvRanks;
  std::set<char> want(ranks, ranks + std::string(ranks).size());
  std::set<char> have;
  for (auto& [rank, extent] : layer.dims) {
    if (extent < 1)
      throw std::invalid_argument(where + ": rank " + std::string(1, rank) + " extent < 1");
    have.insert(rank);
  }
  if (have != want)
    throw std::invalid_argument(where + ": " + to_string(layer.kind) +
                                " needs exactly ranks " + ranks);

  if (layer.kind == LayerKind::GEMM) {
    if (layer.groups != 1) throw std::invalid_argument(where + ": GEMM takes groups == 1");
    return;
  }
  if (layer.dim('C') % layer.groups != 0 || layer.dim('K') % layer.groups != 0)
    throw std::invalid_argument(where + ": groups must divide C and K");
  if (layer.kind == LayerKind::DWCONV &&
      (layer.groups != layer.dim('C') || layer.groups != layer.dim('K')))
    throw std::invalid_argument(where + ": DWCONV needs groups == C == K");
}

TensorInfo tensor_info(const LayerNode& layer, TensorRole role) {
  if (layer.kind == LayerKind::COMPLEX)
    throw std::invalid_argument("layer " + std::to_string(layer.id) +
                                ": COMPLEX layers have no tensors");
  TensorInfo info;
  info.role = role;
  if (layer.kind == LayerKind::GEMM) {
    int64_t m = layer.dim('M'), n = layer.dim('N'), k = layer.dim('K');
    switch (role) {
      case TensorRole::INPUT_ACT: info.volume = m * k; break;
      case TensorRole::WEIGHT: info.volume = k * n; break;
      case TensorRole::OUTPUT_ACT: info.volume = m * n; break;
    }
  } else {
    int64_t n = layer.dim('N'), h = layer.dim('H'), w = layer.dim('W');
    int64_t k = layer.dim('K'), c = layer.dim('C'), r = layer.dim('R'), s = layer.dim('S');
    switch (role) {
      case TensorRole::INPUT_ACT: info.volume = n * (h + r - 1) * (w + s - 1) * c; break;
      case TensorRole::WEIGHT: info.volume = r * s * c * k / layer.groups; break;
      case TensorRole::OUTPUT_ACT: info.volume = n * h * w * k; break;
    }
  }
  info.bytes = info.volume * layer.bytes_per_element;
  return info;
}

void validate_model(const ModelGraph& graph) {
  std::set<int64_t> ids;
  for (auto& layer : graph.layers) {
    check_layer(layer);
    if (!ids.insert(layer.id).second)
      throw std::invalid_argument("duplicate layer id " + std::to_string(layer.id));
  }
  int64_t n = static_cast<int64_t>(graph.layers.size());
  for (auto& [src, dst] : graph.skip_edges) {
    if (src < 0 || dst < 0 || src >= n || dst >= n)
      throw std::invalid_argument("skip edge (" + std::to_string(src) + "," +
                                  std::to_string(dst) + ") out of range");
    if (dst - src < 2)
      throw std::invalid_argument("skip edge (" + std::to_string(src) + "," +
                                  std::to_string(dst) +
                                  ") must jump forward by at least 2 layers");
  }
}

static int64_t get_int(const json& j, const std::string& field, const std::string& where) {
  if (!j.contains(field)) throw std::invalid_argument(where + ": missing field '" + field + "'");
  if (!j[field].is_number_integer())
    throw std::invalid_argument(where + ": field '" + field + "' must be an integer");
  return j[field].get<int64_t>();
}

static void reject_unknown(const json& j, const std::set<std::string>& known,
                           const std::string& where) {
  for (auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key))
      throw std::invalid_argument(where + ": unknown field '" + key + "'");
  }
}

ModelGraph parse_model_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("model JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("model JSON: top level must be an object");
  reject_unknown(root, {"layers", "skips"}, "model");
  if (!root.contains("layers") || !root["layers"].is_array())
    throw std::invalid_argument("model: 'layers' array is required");

  ModelGraph graph;
  int64_t index = 0;
  for (auto& jl : root["layers"]) {
    std::string where = "layers[" + std::to_string(index) + "]";
    if (!jl.is_object()) throw std::invalid_argument(where + ": must be an object");
    reject_unknown(jl, {"id", "kind", "dims", "groups", "bytes_per_element"}, where);
    LayerNode layer;
    layer.id = get_int(jl, "id", where);
    if (!jl.contains("kind") || !jl["kind"].is_string())
      throw std::invalid_argument(where + ": 'kind' string is required");
    layer.kind = layer_kind_from_string(jl["kind"].get<std::string>());
    if (jl.contains("dims")) {
      if (!jl["dims"].is_object()) throw std::invalid_argument(where + ": 'dims' must be an object");
      for (auto& [rank, extent] : jl["dims"].items()) {
        if (rank.size() != 1)
          throw std::invalid_argument(where + ": rank names are single letters, got '" + rank + "'");
        if (!extent.is_number_integer())
          throw std::invalid_argument(where + ": dim '" + rank + "' must be an integer");
        layer.dims[rank[0]] = extent.get<int64_t>();
      }
    }
    if (jl.contains("groups")) layer.groups = get_int(jl, "groups", where);
    if (jl.contains("bytes_per_element"))
      layer.bytes_per_element = get_int(jl, "bytes_per_element", where);
    graph.layers.push_back(std::move(layer));
    ++index;
  }

  if (root.contains("skips")) {
    if (!root["skips"].is_array()) throw std::invalid_argument("model: 'skips' must be an array");
    int64_t si = 0;
    for (auto& js : root["skips"]) {
      std::string where = "skips[" + std::to_string(si++) + "]";
      if (!js.is_array() || js.size() != 2 || !js[0].is_number_integer() ||
          !js[1].is_number_integer())
        throw std::invalid_argument(where + ": expected [src, dst]");
      graph.skip_edges.emplace_back(js[0].get<int64_t>(), js[1].get<int64_t>());
    }
  }

  validate_model(graph);
  return graph;
}

ModelGraph parse_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_text(ss.str());
}

std::string serialize_model(const ModelGraph& graph) {
  json root;
  root["layers"] = json::array();
  for (auto& layer : graph.layers) {
    json jl;
    jl["id"] = layer.id;
    jl["kind"] = to_string(layer.kind);
    if (!layer.dims.empty()) {
      json jd = json::object();
      for (auto& [rank, extent] : layer.dims) jd[std::string(1, rank)] = extent;
      jl["dims"] = jd;
    }
    jl["groups"] = layer.groups;
    jl["bytes_per_element"] = layer.bytes_per_element;
    root["layers"].push_back(jl);
  }
  if (!graph.skip_edges.empty()) {
    root["skips"] = json::array();
    for (auto& [src, dst] : graph.skip_edges) root["skips"].push_back({src, dst});
  }
  return root.dump(2) + "\n";
}

int64_t mac_count(const LayerNode& layer) {
  if (layer.kind == LayerKind::COMPLEX)
    throw std::invalid_argument("layer " + std::to_string(layer.id) +
                                ": COMPLEX layers have no MAC count");
  if (layer.kind == LayerKind::GEMM)
    return layer.dim('M') * layer.dim('N') * layer.dim('K');
  return layer.dim('N') * layer.dim('H') * layer.dim('W') * layer.dim('K') *
         layer.dim('C') * layer.dim('R') * layer.dim('S') / layer.groups;
}

double aw_ratio(const LayerNode& layer, ActCounting counting) {
  int64_t act = tensor_info(layer, TensorRole::INPUT_ACT).volume;
  if (counting == ActCounting::INPUT_PLUS_OUTPUT)
    act += tensor_info(layer, TensorRole::OUTPUT_ACT).volume;
  int64_t weight = tensor_info(layer, TensorRole::WEIGHT).volume;
  return static_cast<double>(act) / static_cast<double>(weight);
}

SkipProfile skip_profile(const ModelGraph& graph) {
  SkipProfile profile;
  profile.in_degree.assign(graph.layers.size(), 0);
  for (size_t i = 1; i < graph.layers.size(); ++i) profile.in_degree[i] = 1;
  for (auto& [src, dst] : graph.skip_edges) {
    profile.edges.push_back({src, dst, dst - src});
    profile.in_degree[dst] += 1;
  }
  if (!graph.layers.empty())
    profile.density =
        static_cast<double>(graph.skip_edges.size()) / static_cast<double>(graph.layers.size());
  return profile;
}

}  // namespace pipeorgan
