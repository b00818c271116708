#include <doctest.h>

#include <stdexcept>

#include "pipeorgan/dataflow.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace pipeorgan;
using namespace pipeorgan::testing;

TEST_CASE("rank classification") {
  CHECK(output_ranks(LayerKind::CONV) == "NHWK");
  CHECK(input_ranks(LayerKind::CONV) == "NHWC");
  CHECK(contracted_ranks(LayerKind::CONV) == "CRS");
  CHECK(unshared_ranks(LayerKind::CONV) == "K");
  CHECK(output_ranks(LayerKind::GEMM) == "MN");
  CHECK(input_ranks(LayerKind::GEMM) == "MK");
  CHECK(contracted_ranks(LayerKind::GEMM) == "K");
  CHECK(unshared_ranks(LayerKind::GEMM) == "N");
}

TEST_CASE("dataflow validation") {
  LayerNode conv = conv_layer(0, 1, 8, 8, 16, 16, 3, 3);
  CHECK_NOTHROW(validate_dataflow(make_dataflow(0, "NHWKCRS", {{'H', 2}}), conv));
  CHECK_THROWS(validate_dataflow(make_dataflow(0, "NHWKCR"), conv));     // missing S
  CHECK_THROWS(validate_dataflow(make_dataflow(0, "NHWKCRR"), conv));    // repeated R
  CHECK_THROWS(validate_dataflow(make_dataflow(0, "NHWKCRS", {{'H', 3}}), conv));  // 3 ∤ 8
  CHECK_THROWS(validate_dataflow(make_dataflow(0, "NHWKCRS", {{'H', 0}}), conv));
  CHECK_THROWS(validate_dataflow(make_dataflow(0, "NHWKCRS", {{'X', 1}}), conv));
  Dataflow spatial = make_dataflow(0, "NHWKCRS");
  spatial.spatial_ranks['K'] = 0;
  CHECK_THROWS(validate_dataflow(spatial, conv));
  CHECK_NOTHROW(validate_dataflow(make_dataflow(0, ""), complex_layer(0)));
  CHECK_THROWS(validate_dataflow(make_dataflow(0, "N"), complex_layer(0)));
}

TEST_CASE("alias map pairs producer outputs with consumer inputs") {
  LayerNode a = conv_layer(0, 1, 8, 8, 16, 16, 3, 3);
  LayerNode b = conv_layer(1, 1, 8, 8, 8, 16, 3, 3);
  RankAliasMap alias = rank_alias_map(a, b);
  CHECK(alias.pairs == std::vector<std::pair<char, char>>{{'N', 'N'}, {'H', 'H'}, {'W', 'W'}, {'K', 'C'}});
  CHECK(alias.aliased('K', 'C'));
  CHECK_FALSE(alias.aliased('K', 'K'));
  CHECK(alias.consumer_of('W') == 'W');
  CHECK(alias.consumer_of('R') == 0);

  RankAliasMap gg = rank_alias_map(gemm_layer(0, 6, 4, 5), gemm_layer(1, 6, 7, 4));
  CHECK(gg.pairs == std::vector<std::pair<char, char>>{{'M', 'M'}, {'N', 'K'}});

  // A conv flattening into a GEMM pairs what it can from the innermost end.
  RankAliasMap cg = rank_alias_map(conv_layer(0, 1, 8, 8, 16, 4, 3, 3), gemm_layer(1, 64, 5, 16));
  CHECK(cg.pairs == std::vector<std::pair<char, char>>{{'K', 'K'}});

  CHECK_THROWS_AS(rank_alias_map(a, conv_layer(1, 1, 8, 8, 8, 32, 3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(rank_alias_map(a, complex_layer(1)), std::invalid_argument);
}

TEST_CASE("pipelinability verdicts and their precedence") {
  LayerNode a = conv_layer(0, 1, 8, 8, 16, 16, 3, 3);
  LayerNode b = conv_layer(1, 1, 8, 8, 8, 16, 3, 3);
  RankAliasMap alias = rank_alias_map(a, b);
  auto verdict = [&](const char* po, const char* co) {
    return check_pipelinable(a, make_dataflow(0, po), b, make_dataflow(1, co), alias);
  };
  CHECK(verdict("NHWKCRS", "NHWCKRS") == PipeVerdict::OK);
  CHECK(verdict("CNHWKRS", "NHWCKRS") == PipeVerdict::CONTRACTED_OUTERMOST);
  CHECK(verdict("NHWKCRS", "KNHWCRS") == PipeVerdict::UNSHARED_OUTERMOST);
  CHECK(verdict("HNWKCRS", "NHWCKRS") == PipeVerdict::SAME_OUTERMOST_VIOLATED);
  // producer violation outranks the consumer one
  CHECK(verdict("CNHWKRS", "KNHWCRS") == PipeVerdict::CONTRACTED_OUTERMOST);
}

TEST_CASE("granularity of frozen producer-consumer pairs") {
  LayerNode a = conv_layer(0, 1, 8, 8, 16, 16, 3, 3);
  LayerNode b = conv_layer(1, 1, 8, 8, 8, 16, 3, 3);
  RankAliasMap alias = rank_alias_map(a, b);

  SUBCASE("all four shared loops fuse down to one element") {
    Dataflow pdf = make_dataflow(0, "NHWKCRS");
    Dataflow cdf = make_dataflow(1, "NHWCKRS");
    Granularity g = finest_granularity(a, pdf, b, cdf, alias);
    CHECK(g.elements == 1);
    CHECK(g.fused_loop_count == 4);
    CHECK(lockstep_granularity(a, pdf, b, cdf) == 1);
  }

  SUBCASE("activation-stationary on both sides stops at the channel loop") {
    Dataflow pdf = make_dataflow(0, "NHWKCRS");
    Dataflow cdf = make_dataflow(1, "NHWKCRS");
    Granularity g = finest_granularity(a, pdf, b, cdf, alias);
    CHECK(g.elements == 16);  // one full K vector
    CHECK(g.fused_loop_count == 3);
    CHECK(lockstep_granularity(a, pdf, b, cdf) == 16);
  }

  SUBCASE("mismatched tiles on the current loop grow the quantum to the lcm") {
    LayerNode p12 = conv_layer(0, 1, 12, 8, 16, 16, 3, 3);
    LayerNode c12 = conv_layer(1, 1, 12, 8, 8, 16, 3, 3);
    Dataflow pdf = make_dataflow(0, "NHWKCRS", {{'H', 2}});
    Dataflow cdf = make_dataflow(1, "NHWCKRS", {{'H', 3}});
    Granularity g = finest_granularity(p12, pdf, c12, cdf, rank_alias_map(p12, c12));
    CHECK(g.elements == 768);  // lcm(2,3) rows of 8x16
    CHECK(g.fused_loop_count == 2);
    CHECK(lockstep_granularity(p12, pdf, c12, cdf) == 768);
  }

  SUBCASE("mismatched tiles on the previous loop stop the fusion") {
    Dataflow pdf = make_dataflow(0, "NHWKCRS", {{'W', 2}});
    Dataflow cdf = make_dataflow(1, "NHWCKRS");
    Granularity g = finest_granularity(a, pdf, b, cdf, alias);
    CHECK(g.elements == 32);  // two W steps of one K vector
    CHECK(g.fused_loop_count == 3);
    CHECK(lockstep_granularity(a, pdf, b, cdf) == 32);
  }

  SUBCASE("GEMM pairs") {
    LayerNode p = gemm_layer(0, 6, 4, 5);
    LayerNode c = gemm_layer(1, 6, 7, 4);
    RankAliasMap gg = rank_alias_map(p, c);
    Granularity fine = finest_granularity(p, make_dataflow(0, "MNK"), c, make_dataflow(1, "MKN"), gg);
    CHECK(fine.elements == 1);
    CHECK(fine.fused_loop_count == 2);
    CHECK(lockstep_granularity(p, make_dataflow(0, "MNK"), c, make_dataflow(1, "MKN")) == 1);

    Granularity row = finest_granularity(p, make_dataflow(0, "MNK"), c, make_dataflow(1, "MNK"), gg);
    CHECK(row.elements == 4);  // one output row
    CHECK(row.fused_loop_count == 1);
    CHECK(lockstep_granularity(p, make_dataflow(0, "MNK"), c, make_dataflow(1, "MNK")) == 4);
  }
}

TEST_CASE("granularity agrees with the lockstep replay on random pairs") {
  Rng rng(11);
  for (int i = 0; i < 40; ++i) {
    RandomPair pair = random_pipelinable_pair(rng);
    RankAliasMap alias = rank_alias_map(pair.producer, pair.consumer);
    REQUIRE(check_pipelinable(pair.producer, pair.pdf, pair.consumer, pair.cdf, alias) ==
            PipeVerdict::OK);
    Granularity g = finest_granularity(pair.producer, pair.pdf, pair.consumer, pair.cdf, alias);
    int64_t expect = lockstep_granularity(pair.producer, pair.pdf, pair.consumer, pair.cdf);
    CHECK(g.elements == expect);
  }
}

TEST_CASE("intra-operator order follows the activation-to-weight ratio") {
  // ratio 196: pure activation-stationary
  CHECK(choose_intra_dataflow(conv_layer(0, 1, 56, 56, 16, 16, 1, 1), 0).loop_order == "NHWKCRS");
  // ratio about 5.8: hybrid
  CHECK(choose_intra_dataflow(conv_layer(0, 1, 56, 56, 64, 64, 3, 3), 0).loop_order == "NHKCWRS");
  // ratio far below 1: weight-stationary
  CHECK(choose_intra_dataflow(conv_layer(0, 1, 2, 2, 512, 512, 3, 3), 0).loop_order == "KCRSNHW");

  CHECK(choose_intra_dataflow(gemm_layer(0, 6400, 64, 64), 0).loop_order == "MNK");   // 100
  CHECK(choose_intra_dataflow(gemm_layer(0, 64, 6400, 64), 0).loop_order == "NKM");   // 0.01
  CHECK(choose_intra_dataflow(gemm_layer(0, 64, 64, 64), 0).loop_order == "MKN");     // exactly 1
  CHECK(choose_intra_dataflow(gemm_layer(0, 10, 1, 1), 0).loop_order == "MNK");       // exactly 10

  CHECK(choose_intra_dataflow(complex_layer(0), 0).loop_order.empty());
}
