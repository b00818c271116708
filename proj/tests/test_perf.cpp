#include <doctest.h>

#include "pipeorgan/perf.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace pipeorgan;
using namespace pipeorgan::testing;

TEST_CASE("per-interval compute cycles") {
  ArchConfig arch;  // dot width 8
  LayerNode conv = conv_layer(0, 1, 56, 56, 64, 64, 3, 3);
  // reduction depth 576, one element on one PE
  CHECK(compute_interval(conv, 1, 1, arch) == 72);
  CHECK(compute_interval(conv, 64, 64, arch) == 72);  // one element per PE
  CHECK(compute_interval(conv, 1, 8, arch) == 576);   // eight elements on one PE

  LayerNode gemm = gemm_layer(0, 64, 64, 64);
  CHECK(compute_interval(gemm, 8, 32, arch) == 32);  // 64 * 4 / 8

  // grouped convolutions lose the dot-product reduction
  LayerNode dw = conv_layer(0, 1, 8, 8, 16, 16, 3, 3, 16);
  CHECK(compute_interval(dw, 2, 4, arch) == 18);  // 9 * 2 / 1

  CHECK(compute_interval(complex_layer(0), 1, 1, arch) == 0);
  CHECK(compute_interval(gemm_layer(0, 4, 4, 4), 1, 1, arch) == 1);  // rounds up
  CHECK_THROWS(compute_interval(conv, 0, 1, arch));
  CHECK_THROWS(compute_interval(conv, 1, 0, arch));
}

TEST_CASE("interval delay models") {
  LoadReport load;
  load.worst_load = 8;
  load.max_hops = 4;

  SUBCASE("serialization takes the max of compute, load and hops") {
    CHECK(interval_delay(10, load, DelayModel::SERIALIZATION).delay == 10);
    CHECK(interval_delay(3, load, DelayModel::SERIALIZATION).delay == 8);
    CHECK(interval_delay(3, load, DelayModel::SERIALIZATION).congested);
    CHECK_FALSE(interval_delay(10, load, DelayModel::SERIALIZATION).congested);
    load.worst_load = 2;
    CHECK(interval_delay(3, load, DelayModel::SERIALIZATION).delay == 4);  // hops dominate
  }

  SUBCASE("literal model serializes the hot channel when intervals are short") {
    CHECK(interval_delay(2, load, DelayModel::PAPER_LITERAL).delay == 16);  // 8 * 2
    CHECK(interval_delay(2, load, DelayModel::PAPER_LITERAL).congested);
    CHECK(interval_delay(4, load, DelayModel::PAPER_LITERAL).delay == 4);  // covers 4 hops
    CHECK_FALSE(interval_delay(4, load, DelayModel::PAPER_LITERAL).congested);
    CHECK(interval_delay(9, load, DelayModel::PAPER_LITERAL).delay == 9);
  }

  SUBCASE("an idle network never congests") {
    LoadReport empty;
    CHECK(interval_delay(3, empty, DelayModel::PAPER_LITERAL).delay == 3);
    CHECK(interval_delay(3, empty, DelayModel::SERIALIZATION).delay == 3);
    CHECK(interval_delay(0, empty, DelayModel::SERIALIZATION).delay == 1);  // floor
  }
}

TEST_CASE("waterfall latency") {
  auto uniform = [](int64_t n, int64_t d) {
    OpSchedule op;
    op.intervals = n;
    op.delays = {d};
    return op;
  };

  SUBCASE("single op runs its intervals back to back") {
    CHECK(pipeline_latency({uniform(5, 7)}) == 35);
  }

  SUBCASE("balanced two-stage pipeline finishes in (n+1) intervals") {
    CHECK(pipeline_latency({uniform(4, 3), uniform(4, 3)}) == 15);
    CHECK(pipeline_latency({uniform(16, 2), uniform(16, 2)}) == 34);
  }

  SUBCASE("coarser consumer amortizes the producer staircase") {
    // producer: 4 at t=4,8; consumer does twice the intervals
    CHECK(pipeline_latency({uniform(2, 4), uniform(4, 2)}) == 12);
    // consumer with half the intervals absorbs two quanta per step
    CHECK(pipeline_latency({uniform(4, 2), uniform(2, 4)}) == 12);
  }

  SUBCASE("per-interval delays") {
    OpSchedule ragged;
    ragged.intervals = 3;
    ragged.delays = {2, 3, 4};
    CHECK(pipeline_latency({ragged}) == 9);
    CHECK_THROWS(pipeline_latency({OpSchedule{3, {1, 2}}}));
    CHECK_THROWS(pipeline_latency({OpSchedule{0, {1}}}));
  }

  SUBCASE("agenda replay agrees on random chains") {
    Rng rng(31);
    for (int round = 0; round < 60; ++round) {
      std::vector<OpSchedule> ops(rng.pick(1, 4));
      for (auto& op : ops) {
        op.intervals = rng.pick(1, 16);
        if (rng.coin()) {
          op.delays = {rng.pick(1, 9)};
        } else {
          for (int64_t t = 0; t < op.intervals; ++t) op.delays.push_back(rng.pick(1, 9));
        }
      }
      CHECK(pipeline_latency(ops) == schedule_latency(ops));
    }
  }
}

TEST_CASE("DRAM accounting") {
  ArchConfig arch;  // 1 MiB SRAM

  SUBCASE("one pipelined segment reads boundary input and resident weights") {
    ModelGraph graph = conv_chain(2, 56, 16);
    PipelinePlan plan = build_plan(graph, arch, PlanKind::PIPEORGAN);
    REQUIRE(plan.segments.size() == 1);
    DramTraffic dram = dram_accesses(plan, graph, arch);
    CHECK(dram.bytes_read == 53824 + 2 * 2304);
    CHECK(dram.bytes_written == 50176);
  }

  SUBCASE("weights beyond SRAM stream once per spill") {
    ModelGraph graph;
    graph.layers.push_back(gemm_layer(0, 64, 6400, 6400));  // 40.96 MB of weights
    PipelinePlan plan = build_plan(graph, arch, PlanKind::PIPEORGAN);
    DramTraffic dram = dram_accesses(plan, graph, arch);
    int64_t weights = 6400 * 6400;
    int64_t mult = (weights + arch.sram_bytes - 1) / arch.sram_bytes;
    CHECK(mult == 40);
    CHECK(dram.bytes_read == 64 * 6400 + weights * mult);
  }

  SUBCASE("skips crossing a window spill and reload once") {
    ModelGraph graph = conv_chain(4, 56, 16);
    graph.skip_edges.push_back({0, 3});
    graph.skip_edges.push_back({0, 2});
    PipelinePlan plan = build_plan(graph, arch, PlanKind::TANGRAM_LIKE);  // windows [0,2) [2,4)
    REQUIRE(plan.segments.size() == 2);
    DramTraffic dram = dram_accesses(plan, graph, arch);
    // reads: head inputs + weights + one deduped reload of layer 0's output
    CHECK(dram.bytes_read == (53824 + 2 * 2304) + (53824 + 2 * 2304) + 50176);
    // writes: both tails + one spill of layer 0's output (not the tail of its window)
    CHECK(dram.bytes_written == 50176 + 50176 + 50176);
  }

  SUBCASE("complex layers move no data themselves") {
    ModelGraph graph;
    graph.layers.push_back(complex_layer(0));
    PipelinePlan plan = build_plan(graph, arch, PlanKind::PIPEORGAN);
    DramTraffic dram = dram_accesses(plan, graph, arch);
    CHECK(dram.bytes_read == 0);
    CHECK(dram.bytes_written == 0);
  }
}

TEST_CASE("end-to-end report") {
  ArchConfig arch;

  SUBCASE("single-layer model: one interval, standalone latency") {
    ModelGraph graph = conv_chain(1, 8, 16);
    PipelinePlan plan = build_plan(graph, arch, PlanKind::PIPEORGAN);
    PerfReport report = end_to_end(plan, graph, arch, TopoKind::MESH);
    REQUIRE(report.segments.size() == 1);
    CHECK(report.segments[0].intervals == 1);
    CHECK(report.segments[0].worst_load == 0);  // nothing to ship
    CHECK(report.total_cycles > 0);
  }

  SUBCASE("complex segments contribute nothing") {
    ModelGraph graph = conv_chain(3, 8, 16);
    graph.layers[1] = complex_layer(1);
    PipelinePlan plan = build_plan(graph, arch, PlanKind::PIPEORGAN);
    PerfReport report = end_to_end(plan, graph, arch, TopoKind::MESH);
    REQUIRE(report.segments.size() == 3);
    CHECK(report.segments[1].total_cycles == 0);
    CHECK(report.segments[1].energy == 0.0);
  }

  SUBCASE("express links cut the load of a blocked pipeline") {
    ModelGraph graph = conv_chain(2, 32, 32);
    PipelinePlan plan = build_plan(graph, arch, PlanKind::TANGRAM_LIKE);
    PerfReport mesh = end_to_end(plan, graph, arch, TopoKind::MESH);
    PerfReport amp = end_to_end(plan, graph, arch, TopoKind::AMP);
    CHECK(amp.worst_load <= mesh.worst_load);
    CHECK(amp.total_cycles <= mesh.total_cycles);
    REQUIRE(mesh.segments.size() == 1);
    CHECK(amp.segments[0].max_hops < mesh.segments[0].max_hops);
    // express links shorten routes, not wire length: same energy
    CHECK(amp.hop_energy == doctest::Approx(mesh.hop_energy));
    CHECK(mesh.dram_bytes_read == amp.dram_bytes_read);  // topology does not touch DRAM
  }
}
