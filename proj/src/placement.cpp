#include "pipeorgan/placement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pipeorgan {

using nlohmann::json;

std::string to_string(OrgStrategy strategy) {
  switch (strategy) {
    case OrgStrategy::BLOCKED_1D: return "BLOCKED_1D";
    case OrgStrategy::BLOCKED_2D: return "BLOCKED_2D";
    case OrgStrategy::FINE_STRIPED_1D: return "FINE_STRIPED_1D";
    case OrgStrategy::CHECKERBOARD_2D: return "CHECKERBOARD_2D";
    case OrgStrategy::SEQUENTIAL: return "SEQUENTIAL";
    case OrgStrategy::GB_BLOCKED: return "GB_BLOCKED";
  }
  throw std::logic_error("bad OrgStrategy");
}

std::string to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::PIPEORGAN: return "pipeorgan";
    case PlanKind::TANGRAM_LIKE: return "tangram";
    case PlanKind::SIMBA_LIKE: return "simba";
  }
  throw std::logic_error("bad PlanKind");
}

ArchConfig parse_arch_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("arch JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("arch JSON: top level must be an object");
  ArchConfig cfg;
  const std::set<std::string> known = {"rows",     "cols",          "dot_width",
                                       "rf_per_pe", "sram_bytes",    "dram_bw",
                                       "bytes_per_word", "link_flit_bytes", "amp_link_len"};
  for (auto& [key, value] : root.items()) {
    if (!known.count(key)) throw std::invalid_argument("arch: unknown field '" + key + "'");
    if (!value.is_number_integer())
      throw std::invalid_argument("arch: field '" + key + "' must be an integer");
  }
  auto get = [&](const char* field, int64_t fallback) {
    return root.contains(field) ? root[field].get<int64_t>() : fallback;
  };
  cfg.rows = get("rows", cfg.rows);
  cfg.cols = get("cols", cfg.cols);
  cfg.dot_width = get("dot_width", cfg.dot_width);
  cfg.rf_per_pe = get("rf_per_pe", cfg.rf_per_pe);
  cfg.sram_bytes = get("sram_bytes", cfg.sram_bytes);
  cfg.dram_bw = get("dram_bw", cfg.dram_bw);
  cfg.bytes_per_word = get("bytes_per_word", cfg.bytes_per_word);
  cfg.link_flit_bytes = get("link_flit_bytes", cfg.link_flit_bytes);
  cfg.amp_link_len = get("amp_link_len", cfg.amp_link_len);
  if (cfg.rows < 2 || cfg.cols < 2) throw std::invalid_argument("arch: array must be at least 2x2");
  if (cfg.dot_width < 1 || cfg.rf_per_pe < 1 || cfg.sram_bytes < 1 || cfg.dram_bw < 1 ||
      cfg.bytes_per_word < 1 || cfg.link_flit_bytes < 1)
    throw std::invalid_argument("arch: sizes must be positive");
  return cfg;
}

ArchConfig parse_arch(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open arch file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_arch_text(ss.str());
}

std::vector<int64_t> allocate_pes(const ModelGraph& graph, const PipelineSegment& segment,
                                  int64_t num_pes) {
  if (segment.depth > num_pes)
    throw std::invalid_argument("segment depth " + std::to_string(segment.depth) +
                                " exceeds " + std::to_string(num_pes) + " PEs");
  if (segment.depth == 1) return {num_pes};

  std::vector<int64_t> macs;
  __int128 total = 0;
  for (int64_t i = segment.first; i < segment.first + segment.depth; ++i) {
    macs.push_back(mac_count(graph.layers[i]));
    total += macs.back();
  }

  std::vector<int64_t> counts(macs.size(), 0);
  std::vector<std::pair<__int128, size_t>> remainders;
  int64_t assigned = 0;
  for (size_t i = 0; i < macs.size(); ++i) {
    __int128 num = static_cast<__int128>(macs[i]) * num_pes;
    counts[i] = static_cast<int64_t>(num / total);
    remainders.push_back({num % total, i});
    assigned += counts[i];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t i = 0; assigned < num_pes; ++i, ++assigned) counts[remainders[i % remainders.size()].second] += 1;

  // Keep every stage alive: steal from the fattest share for zero-MAC-share layers.
  for (size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) continue;
    size_t fattest = std::max_element(counts.begin(), counts.end()) - counts.begin();
    counts[fattest] -= 1;
    counts[i] += 1;
  }
  return counts;
}

OrgChoice choose_organization(const ModelGraph& graph, const PipelineSegment& segment,
                              const std::vector<int64_t>& pe_counts,
                              const ArchConfig& config) {
  OrgChoice choice;
  if (segment.depth == 1 || segment.pairs.empty()) {
    choice.strategy = OrgStrategy::BLOCKED_1D;
    return choice;
  }

  size_t widest = 0;
  int64_t g_bytes = 0;
  for (size_t i = 0; i < segment.pairs.size(); ++i) {
    const LayerNode& producer = graph.layers[segment.first + static_cast<int64_t>(i)];
    int64_t bytes = segment.pairs[i].granularity.elements * producer.bytes_per_element;
    if (bytes > g_bytes) {
      g_bytes = bytes;
      widest = i;
    }
  }

  int64_t producer_count = pe_counts.at(widest);
  int64_t rf_total = producer_count * config.rf_per_pe;
  if (rf_total < g_bytes) {
    choice.strategy = OrgStrategy::GB_BLOCKED;
    return choice;
  }
  int64_t k = (g_bytes + config.rf_per_pe - 1) / config.rf_per_pe;
  if (k <= 1) {
    choice.strategy =
        segment.depth > 2 ? OrgStrategy::CHECKERBOARD_2D : OrgStrategy::FINE_STRIPED_1D;
    choice.stripe_width = 1;
  } else if (k >= producer_count) {
    choice.strategy = segment.depth > 2 ? OrgStrategy::BLOCKED_2D : OrgStrategy::BLOCKED_1D;
  } else {
    choice.strategy =
        segment.depth > 2 ? OrgStrategy::CHECKERBOARD_2D : OrgStrategy::FINE_STRIPED_1D;
    choice.stripe_width = std::max<int64_t>(1, (k + config.cols - 1) / config.cols);
  }
  return choice;
}

static Placement blocked_1d(const std::vector<int64_t>& counts, const ArchConfig& config) {
  Placement p;
  p.rows = config.rows;
  p.cols = config.cols;
  p.owner.assign(config.num_pes(), -1);
  p.layer_pes.resize(counts.size());
  int64_t pe = 0;
  for (size_t layer = 0; layer < counts.size(); ++layer) {
    for (int64_t i = 0; i < counts[layer]; ++i, ++pe) {
      p.owner[pe] = static_cast<int64_t>(layer);
      p.layer_pes[layer].push_back(pe);
    }
  }
  return p;
}

static bool all_equal(const std::vector<int64_t>& counts) {
  return std::adjacent_find(counts.begin(), counts.end(), std::not_equal_to<>()) == counts.end();
}

static bool striped_1d(Placement& p, const std::vector<int64_t>& counts,
                       const ArchConfig& config, int64_t stripe_rows) {
  int64_t depth = static_cast<int64_t>(counts.size());
  if (!all_equal(counts)) return false;
  if (stripe_rows < 1 || config.rows % (depth * stripe_rows) != 0) return false;
  p.owner.assign(config.num_pes(), -1);
  p.layer_pes.assign(depth, {});
  for (int64_t row = 0; row < config.rows; ++row) {
    int64_t layer = (row / stripe_rows) % depth;
    for (int64_t col = 0; col < config.cols; ++col) {
      int64_t pe = row * config.cols + col;
      p.owner[pe] = layer;
      p.layer_pes[layer].push_back(pe);
    }
  }
  for (int64_t l = 0; l < depth; ++l)
    if (static_cast<int64_t>(p.layer_pes[l].size()) != counts[l]) return false;
  return true;
}

static bool blocked_2d(Placement& p, const std::vector<int64_t>& counts,
                       const ArchConfig& config) {
  int64_t depth = static_cast<int64_t>(counts.size());
  if (!all_equal(counts)) return false;
  int64_t best_gr = 0, best_gc = 0;
  for (int64_t gr = static_cast<int64_t>(std::sqrt(static_cast<double>(depth))); gr >= 1; --gr) {
    if (depth % gr != 0) continue;
    int64_t gc = depth / gr;
    if (config.rows % gr == 0 && config.cols % gc == 0) {
      best_gr = gr;
      best_gc = gc;
      break;
    }
  }
  if (best_gr == 0) return false;
  int64_t block_rows = config.rows / best_gr;
  int64_t block_cols = config.cols / best_gc;
  p.owner.assign(config.num_pes(), -1);
  p.layer_pes.assign(depth, {});
  // Snake through the block grid so consecutive stages share a boundary:
  // east across the first band, drop south, west across the next.
  int64_t layer = 0;
  for (int64_t bi = 0; bi < best_gr; ++bi) {
    for (int64_t s = 0; s < best_gc; ++s, ++layer) {
      int64_t bj = (bi % 2 == 0) ? s : best_gc - 1 - s;
      for (int64_t r = bi * block_rows; r < (bi + 1) * block_rows; ++r)
        for (int64_t c = bj * block_cols; c < (bj + 1) * block_cols; ++c)
          p.owner[r * config.cols + c] = layer;
    }
  }
  for (int64_t pe = 0; pe < config.num_pes(); ++pe) p.layer_pes[p.owner[pe]].push_back(pe);
  for (int64_t l = 0; l < depth; ++l)
    if (static_cast<int64_t>(p.layer_pes[l].size()) != counts[l]) return false;
  return true;
}

static bool checkerboard_2d(Placement& p, const std::vector<int64_t>& counts,
                            const ArchConfig& config, int64_t cell) {
  int64_t depth = static_cast<int64_t>(counts.size());
  if (!all_equal(counts)) return false;
  if (cell < 1 || config.rows % cell != 0 || config.cols % cell != 0) return false;
  int64_t grid_cols = config.cols / cell;
  if (grid_cols % depth != 0) return false;  // diagonal pattern stays balanced
  p.owner.assign(config.num_pes(), -1);
  p.layer_pes.assign(depth, {});
  for (int64_t row = 0; row < config.rows; ++row)
    for (int64_t col = 0; col < config.cols; ++col) {
      int64_t layer = ((row / cell) + (col / cell)) % depth;
      p.owner[row * config.cols + col] = layer;
    }
  for (int64_t pe = 0; pe < config.num_pes(); ++pe) p.layer_pes[p.owner[pe]].push_back(pe);
  for (int64_t l = 0; l < depth; ++l)
    if (static_cast<int64_t>(p.layer_pes[l].size()) != counts[l]) return false;
  return true;
}

Placement realize_placement(const OrgChoice& org, const std::vector<int64_t>& pe_counts,
                            const ArchConfig& config) {
  int64_t total = std::accumulate(pe_counts.begin(), pe_counts.end(), int64_t{0});
  if (total > config.num_pes())
    throw std::invalid_argument("placement wants " + std::to_string(total) + " PEs, array has " +
                                std::to_string(config.num_pes()));
  for (int64_t count : pe_counts)
    if (count < 1) throw std::invalid_argument("every layer needs at least one PE");

  Placement p;
  p.rows = config.rows;
  p.cols = config.cols;
  p.org = org;
  bool ok = false;
  switch (org.strategy) {
    case OrgStrategy::BLOCKED_1D:
    case OrgStrategy::GB_BLOCKED:
      p = blocked_1d(pe_counts, config);
      ok = true;
      break;
    case OrgStrategy::FINE_STRIPED_1D:
      ok = striped_1d(p, pe_counts, config, org.stripe_width);
      break;
    case OrgStrategy::BLOCKED_2D:
      ok = blocked_2d(p, pe_counts, config);
      break;
    case OrgStrategy::CHECKERBOARD_2D:
    case OrgStrategy::SEQUENTIAL:
      ok = checkerboard_2d(p, pe_counts, config, org.stripe_width);
      break;
  }
  if (!ok) {
    p = blocked_1d(pe_counts, config);
    p.fallback = true;
  }
  p.org = org;
  p.rows = config.rows;
  p.cols = config.cols;
  return p;
}

static SegmentPlan plan_segment(const PipelineSegment& segment, const ModelGraph& graph,
                                const ArchConfig& config, OrgChoice forced,
                                bool use_heuristic) {
  SegmentPlan sp;
  sp.segment = segment;
  sp.pe_counts = allocate_pes(graph, segment, config.num_pes());
  sp.org = use_heuristic ? choose_organization(graph, segment, sp.pe_counts, config) : forced;
  sp.placement = realize_placement(sp.org, sp.pe_counts, config);
  for (int64_t i = 0; i + 1 < segment.depth; ++i) {
    const LayerNode& producer = graph.layers[segment.first + i];
    const LayerNode& consumer = graph.layers[segment.first + i + 1];
    sp.realized.push_back(
        decide_pair(producer, segment.dataflows[i], consumer, segment.dataflows[i + 1])
            .granularity);
  }
  return sp;
}

PipelinePlan build_plan(const ModelGraph& graph, const ArchConfig& config, PlanKind kind) {
  if (kind != PlanKind::PIPEORGAN) return baseline_plan(graph, config, kind);
  SegmenterConfig scfg;
  scfg.num_pes = config.num_pes();
  scfg.sram_bytes = config.sram_bytes;
  PipelinePlan plan;
  plan.kind = kind;
  for (auto& segment : segment_model(graph, scfg))
    plan.segments.push_back(plan_segment(segment, graph, config, {}, true));
  return plan;
}

static Dataflow stationary_order(const LayerNode& layer, bool output_stationary) {
  Dataflow df;
  df.layer_id = layer.id;
  if (layer.kind == LayerKind::COMPLEX) return df;
  if (layer.kind == LayerKind::GEMM)
    df.loop_order = output_stationary ? "MNK" : "MKN";
  else
    df.loop_order = output_stationary ? "NHWKCRS" : "NHWCKRS";
  return df;
}

static int64_t channel_parallelism(const LayerNode& layer) {
  if (layer.kind == LayerKind::COMPLEX) return 1;
  if (layer.kind == LayerKind::GEMM) return layer.dim('K') * layer.dim('N');
  return layer.dim('C') * layer.dim('K') / layer.groups;
}

PipelinePlan baseline_plan(const ModelGraph& graph, const ArchConfig& config, PlanKind kind) {
  if (graph.layers.empty()) throw std::invalid_argument("model has no layers");
  validate_model(graph);
  PipelinePlan plan;
  plan.kind = kind;
  int64_t n = static_cast<int64_t>(graph.layers.size());

  if (kind == PlanKind::TANGRAM_LIKE) {
    for (int64_t first = 0; first < n;) {
      PipelineSegment seg;
      seg.first = first;
      if (graph.layers[first].kind == LayerKind::COMPLEX) {
        seg.depth = 1;
        seg.cut_reason = CutReason::COMPLEX_LAYER;
      } else if (first + 1 < n && graph.layers[first + 1].kind != LayerKind::COMPLEX) {
        seg.depth = 2;
        seg.cut_reason = CutReason::MAX_DEPTH;  // fixed-depth policy
      } else {
        seg.depth = 1;
        seg.cut_reason = first + 1 < n ? CutReason::COMPLEX_LAYER : CutReason::END_OF_MODEL;
      }
      for (int64_t i = 0; i < seg.depth; ++i)
        seg.dataflows.push_back(stationary_order(graph.layers[first + i], i % 2 == 0));
      for (int64_t i = 0; i + 1 < seg.depth; ++i)
        seg.pairs.push_back(decide_pair(graph.layers[first + i], seg.dataflows[i],
                                        graph.layers[first + i + 1], seg.dataflows[i + 1]));
      OrgChoice blocked{OrgStrategy::BLOCKED_1D, 1};
      plan.segments.push_back(plan_segment(seg, graph, config, blocked, false));
      first += seg.depth;
    }
    return plan;
  }

  if (kind != PlanKind::SIMBA_LIKE) throw std::invalid_argument("not a baseline plan kind");

  for (int64_t first = 0; first < n;) {
    PipelineSegment seg;
    seg.first = first;
    if (graph.layers[first].kind == LayerKind::COMPLEX) {
      seg.depth = 1;
      seg.cut_reason = CutReason::COMPLEX_LAYER;
    } else {
      // Stay layer-sequential while channel parallelism fills the array;
      // pipeline deeper only to soak up idle PEs.
      int64_t depth = 1;
      int64_t util = channel_parallelism(graph.layers[first]);
      seg.cut_reason = CutReason::FOOTPRINT;
      while (util < config.num_pes()) {
        if (first + depth == n) {
          seg.cut_reason = CutReason::END_OF_MODEL;
          break;
        }
        if (graph.layers[first + depth].kind == LayerKind::COMPLEX) {
          seg.cut_reason = CutReason::COMPLEX_LAYER;
          break;
        }
        if (depth == config.num_pes()) {
          seg.cut_reason = CutReason::MAX_DEPTH;
          break;
        }
        util += channel_parallelism(graph.layers[first + depth]);
        ++depth;
      }
      seg.depth = depth;
    }
    for (int64_t i = 0; i < seg.depth; ++i) {
      const LayerNode& layer = graph.layers[first + i];
      Dataflow df = stationary_order(layer, true);
      if (layer.kind == LayerKind::GEMM) {
        df.spatial_ranks['K'] = layer.dim('K');
        df.spatial_ranks['N'] = layer.dim('N');
      } else if (layer.kind != LayerKind::COMPLEX) {
        df.spatial_ranks['C'] = layer.dim('C') / layer.groups;
        df.spatial_ranks['K'] = layer.dim('K');
      }
      seg.dataflows.push_back(std::move(df));
    }
    for (int64_t i = 0; i + 1 < seg.depth; ++i)
      seg.pairs.push_back(decide_pair(graph.layers[first + i], seg.dataflows[i],
                                      graph.layers[first + i + 1], seg.dataflows[i + 1]));
    OrgChoice blocked{OrgStrategy::BLOCKED_1D, 1};
    plan.segments.push_back(plan_segment(seg, graph, config, blocked, false));
    first += seg.depth;
  }
  return plan;
}

}  // namespace pipeorgan
