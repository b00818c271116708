#include "pipeorgan/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "pipeorgan/svg.hpp"

namespace pipeorgan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Partial output must never land under the final name.
void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
  }
  fs::rename(tmp, path);
}

struct Loaded {
  ModelGraph graph;
  ArchConfig arch;
  std::string task;
};

int load_inputs(const RunConfig& run, Loaded& io) {
  io.graph = parse_model(run.model_path);
  io.arch = run.arch_path.empty() ? ArchConfig{} : parse_arch(run.arch_path);
  io.task = fs::path(run.model_path).stem().string();
  if (io.graph.layers.empty()) {
    std::cerr << "error: model has no layers\n";
    return 2;
  }
  return 0;
}

bool parse_org(const std::string& name, OrgStrategy& strategy) {
  if (name == "blocked1d") strategy = OrgStrategy::BLOCKED_1D;
  else if (name == "blocked2d") strategy = OrgStrategy::BLOCKED_2D;
  else if (name == "fine-striped") strategy = OrgStrategy::FINE_STRIPED_1D;
  else if (name == "checkerboard") strategy = OrgStrategy::CHECKERBOARD_2D;
  else if (name == "sequential") strategy = OrgStrategy::SEQUENTIAL;
  else if (name == "gb") strategy = OrgStrategy::GB_BLOCKED;
  else return false;
  return true;
}

PipelinePlan make_plan(const RunConfig& run, const Loaded& io) {
  PipelinePlan plan = build_plan(io.graph, io.arch, run.plan);
  if (!run.org_override.empty()) {
    OrgStrategy forced;
    if (!parse_org(run.org_override, forced))
      throw std::invalid_argument("unknown organization '" + run.org_override + "'");
    for (auto& sp : plan.segments) {
      sp.org = {forced, run.stripe_override > 0 ? run.stripe_override : 1};
      sp.placement = realize_placement(sp.org, sp.pe_counts, io.arch);
    }
  }
  return plan;
}

int64_t layer_granularity(const PipelinePlan& plan, const ModelGraph& graph, int64_t layer) {
  for (auto& sp : plan.segments) {
    const PipelineSegment& seg = sp.segment;
    if (layer < seg.first || layer >= seg.first + seg.depth) continue;
    if (graph.layers[layer].kind == LayerKind::COMPLEX) return 0;
    int64_t pair = layer - seg.first;
    if (pair < static_cast<int64_t>(seg.pairs.size()))
      return seg.pairs[pair].granularity.elements;
    return tensor_info(graph.layers[layer], TensorRole::OUTPUT_ACT).volume;
  }
  return 0;
}

}  // namespace

int cmd_analyze(const RunConfig& run) {
  Loaded io;
  if (int rc = load_inputs(run, io)) return rc;
  PipelinePlan plan = make_plan(run, io);

  std::ostringstream depth_csv;
  depth_csv << "layer_id,depth,granularity_elements,cut_reason\n";
  std::ostringstream gran_csv;
  gran_csv << "layer_id,granularity_elements\n";
  for (auto& sp : plan.segments) {
    const PipelineSegment& seg = sp.segment;
    for (int64_t i = seg.first; i < seg.first + seg.depth; ++i) {
      int64_t g = layer_granularity(plan, io.graph, i);
      depth_csv << io.graph.layers[i].id << "," << seg.depth << "," << g << ","
                << to_string(seg.cut_reason) << "\n";
      gran_csv << io.graph.layers[i].id << "," << g << "\n";
    }
  }
  write_file(fs::path(run.out_dir) / "depth.csv", depth_csv.str());
  write_file(fs::path(run.out_dir) / "granularity.csv", gran_csv.str());
  return 0;
}

int cmd_map(const RunConfig& run) {
  Loaded io;
  if (int rc = load_inputs(run, io)) return rc;
  PipelinePlan plan = make_plan(run, io);

  json root;
  root["task"] = io.task;
  root["plan"] = to_string(plan.kind);
  root["segments"] = json::array();
  for (size_t k = 0; k < plan.segments.size(); ++k) {
    auto& sp = plan.segments[k];
    json js;
    js["first"] = sp.segment.first;
    js["depth"] = sp.segment.depth;
    js["cut_reason"] = to_string(sp.segment.cut_reason);
    js["organization"] = to_string(sp.org.strategy);
    js["stripe_width"] = sp.org.stripe_width;
    js["fallback"] = sp.placement.fallback;
    js["pe_counts"] = sp.pe_counts;
    json grid = json::array();
    for (int64_t r = 0; r < sp.placement.rows; ++r) {
      json row = json::array();
      for (int64_t c = 0; c < sp.placement.cols; ++c) {
        int64_t owner = sp.placement.owner[r * sp.placement.cols + c];
        row.push_back(owner < 0 ? -1 : io.graph.layers[sp.segment.first + owner].id);
      }
      grid.push_back(row);
    }
    js["grid"] = grid;
    root["segments"].push_back(js);
    write_file(fs::path(run.out_dir) / ("placement_" + std::to_string(k) + ".svg"),
               placement_svg(sp.placement));
  }
  write_file(fs::path(run.out_dir) / "placement.json", root.dump(2) + "\n");
  return 0;
}

namespace {

// The congestion sweep reproduces the depth-2 picture on the configured
// array: equal halves, every producer column-aligned with its consumer,
// one packet per producer per interval.
FlowSet sweep_flows(const ArchConfig& arch, bool striped) {
  FlowSet flows;
  int64_t half = arch.rows / 2;
  for (int64_t r = 0; r + half < arch.rows; ++r)
    for (int64_t c = 0; c < arch.cols; ++c) {
      PE src{striped ? 2 * r : r, c};
      PE dst{striped ? 2 * r + 1 : r + half, c};
      if (src.row >= arch.rows || dst.row >= arch.rows) continue;
      flows.push_back({src, dst, arch.link_flit_bytes, FlowTag::PIPE});
    }
  return flows;
}

}  // namespace

int cmd_simulate(const RunConfig& run) {
  Loaded io;
  if (int rc = load_inputs(run, io)) return rc;
  PipelinePlan plan = make_plan(run, io);
  Topology topo = build_topology(run.topology, io.arch.rows, io.arch.cols, io.arch.amp_link_len);

  // Hottest segment carries the picture.
  LoadReport best;
  bool have = false;
  for (auto& sp : plan.segments) {
    if (io.graph.layers[sp.segment.first].kind == LayerKind::COMPLEX) continue;
    FlowSet flows = generate_traffic(sp, io.graph, io.arch);
    LoadReport load = channel_loads(topo, flows, io.arch.link_flit_bytes);
    if (!have || load.worst_load > best.worst_load) {
      best = load;
      have = true;
    }
  }

  std::ostringstream loads_csv;
  loads_csv << "row_a,col_a,row_b,col_b,load_packets,load_bytes\n";
  for (auto& [link, load] : best.per_link)
    loads_csv << link.a.row << "," << link.a.col << "," << link.b.row << "," << link.b.col << ","
              << load.first << "," << load.second << "\n";
  write_file(fs::path(run.out_dir) / "link_loads.csv", loads_csv.str());
  write_file(fs::path(run.out_dir) / "heatmap.svg", link_heatmap_svg(topo, best));

  Topology mesh = build_topology(TopoKind::MESH, io.arch.rows, io.arch.cols);
  Topology amp = build_topology(TopoKind::AMP, io.arch.rows, io.arch.cols, io.arch.amp_link_len);
  LoadReport blocked = channel_loads(mesh, sweep_flows(io.arch, false), io.arch.link_flit_bytes);
  LoadReport fine = channel_loads(mesh, sweep_flows(io.arch, true), io.arch.link_flit_bytes);
  LoadReport amp_blocked =
      channel_loads(amp, sweep_flows(io.arch, false), io.arch.link_flit_bytes);

  std::ostringstream congestion_csv;
  congestion_csv << "config,interval,worst_load,interval_delay\n";
  auto sweep = [&](const char* name, const LoadReport& load) {
    for (int64_t interval = 1; interval <= 16; ++interval) {
      IntervalTiming t = interval_delay(interval, load, run.delay_model);
      congestion_csv << name << "," << interval << "," << load.worst_load << "," << t.delay
                     << "\n";
    }
  };
  sweep("blocked", blocked);
  sweep("fine_striped", fine);
  sweep("amp", amp_blocked);
  write_file(fs::path(run.out_dir) / "congestion.csv", congestion_csv.str());
  return 0;
}

int cmd_report(const RunConfig& run) {
  Loaded io;
  if (int rc = load_inputs(run, io)) return rc;

  struct Row {
    PlanKind kind;
    PerfReport perf;
  };
  std::vector<Row> rows;
  for (PlanKind kind : {PlanKind::TANGRAM_LIKE, PlanKind::SIMBA_LIKE, PlanKind::PIPEORGAN}) {
    PipelinePlan plan = build_plan(io.graph, io.arch, kind);
    rows.push_back({kind, end_to_end(plan, io.graph, io.arch, run.topology, run.delay_model)});
  }
  const PerfReport& base = rows[0].perf;
  double base_dram =
      static_cast<double>(base.dram_bytes_read + base.dram_bytes_written);

  std::ostringstream csv;
  csv << "task,plan,cycles,dram_read,dram_write,energy,worst_load,norm_perf,norm_dram\n";
  for (auto& row : rows) {
    double dram = static_cast<double>(row.perf.dram_bytes_read + row.perf.dram_bytes_written);
    csv << io.task << "," << to_string(row.kind) << "," << row.perf.total_cycles << ","
        << row.perf.dram_bytes_read << "," << row.perf.dram_bytes_written << ","
        << fmt_double(row.perf.hop_energy) << "," << row.perf.worst_load << ","
        << fmt_double(static_cast<double>(base.total_cycles) /
                      static_cast<double>(row.perf.total_cycles)) << ","
        << fmt_double(dram / base_dram) << "\n";
  }
  write_file(fs::path(run.out_dir) / "comparison.csv", csv.str());
  return 0;
}

}  // namespace pipeorgan
