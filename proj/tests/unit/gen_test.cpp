#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "tunegrid/error.hpp"
#include "tunegrid/gen/generator.hpp"
#include "tunegrid/histo/fit.hpp"

namespace {

using namespace tunegrid::gen;
using tunegrid::tune::TuneParameters;

const GeneratorModel& model() {
  static const GeneratorModel m = GeneratorModel::default_model();
  return m;
}

TEST(DeriveChunkSeed, Arithmetic) {
  static_assert(derive_chunk_seed(Seed{7}, 0) == Seed{7});
  static_assert(derive_chunk_seed(Seed{7}, 3) == Seed{10});
  static_assert(derive_chunk_seed(Seed{std::numeric_limits<std::uint64_t>::max()}, 1) == Seed{0});
  SUCCEED();
}

TEST(ExpectedReference, ClosedForm) {
  tunegrid::tune::ParamSpace space({{"a", 0.5, 5.0}, {"b", 0.0, 1.0}});
  GeneratorModel m(space, {{"x", 0, 1, {0.0, 0.5, 1.0}}});
  const auto ref = expected_reference(m, {{2.0, 0.0}});
  EXPECT_DOUBLE_EQ(ref.at("x").probabilities[0], 0.25);

  const auto flat = expected_reference(m, {{3.3, 1.0}});
  EXPECT_DOUBLE_EQ(flat.at("x").probabilities[0], 0.5);
  EXPECT_DOUBLE_EQ(flat.at("x").probabilities[1], 0.5);
}

TEST(ExpectedReference, SumsToOne) {
  for (double a : {0.5, 1.0, 2.0, 5.0}) {
    for (double b : {0.0, 0.5, 1.0}) {
      const auto ref = expected_reference(model(), {{a, b, a, b}});
      for (const auto& [id, r] : ref) {
        double total = 0.0;
        for (double p : r.probabilities) total += p;
        EXPECT_NEAR(total, 1.0, 1e-12);
      }
    }
  }
}

TEST(GenerateChunk, UniformWhenFlatIsOne) {
  const std::uint64_t n = 200000;
  for (double a : {0.5, 3.0}) {
    const auto set = generate_chunk(model(), {{a, 1.0, 1.0, 0.3}}, n, Seed{99});
    for (double c : set.histograms.at("obs1").counts) EXPECT_NEAR(c, 0.05 * n, 4 * std::sqrt(0.05 * n));
    // a = 1 is uniform for any b
    for (double c : set.histograms.at("obs2").counts) EXPECT_NEAR(c, 0.05 * n, 4 * std::sqrt(0.05 * n));
  }
}

TEST(GenerateChunk, Deterministic) {
  const TuneParameters p{{2.0, 0.3, 4.0, 0.1}};
  EXPECT_EQ(generate_chunk(model(), p, 5000, Seed{123}), generate_chunk(model(), p, 5000, Seed{123}));
  EXPECT_NE(generate_chunk(model(), p, 5000, Seed{123}), generate_chunk(model(), p, 5000, Seed{124}));
}

TEST(GenerateChunk, EveryEventLandsInRange) {
  const auto set = generate_chunk(model(), {{0.5, 0.0, 5.0, 0.0}}, 20000, Seed{1});
  EXPECT_EQ(set.n_events, 20000u);
  for (const auto& [id, h] : set.histograms) {
    EXPECT_EQ(h.sum(), 20000.0);
    EXPECT_EQ(h.n_events, 20000u);
  }
}

TEST(GenerateChunk, OutOfSpace) {
  try {
    generate_chunk(model(), {{6.0, 0.0, 1.0, 0.0}}, 10, Seed{1});
    FAIL();
  } catch (const tunegrid::Error& e) {
    EXPECT_EQ(e.code(), tunegrid::ErrorCode::kOutOfSpace);
  }
  EXPECT_THROW(expected_reference(model(), {{1.0, 2.0, 1.0, 0.0}}), tunegrid::Error);
}

TEST(GenerateChunk, StopTokenInterrupts) {
  std::stop_source src;
  src.request_stop();
  ChunkOptions opts;
  opts.stop = src.get_token();
  EXPECT_FALSE(generate_chunk(model(), model().space().center(), 10000, Seed{1}, opts).has_value());
}

TEST(GeneratorModel, ConfigValidation) {
  tunegrid::tune::ParamSpace wide({{"a", 0.1, 5.0}, {"b", 0.0, 1.0}});
  EXPECT_THROW(GeneratorModel(wide, {{"x", 0, 1, {0.0, 1.0}}}), tunegrid::Error);
  tunegrid::tune::ParamSpace ok({{"a", 0.5, 5.0}, {"b", 0.0, 1.0}});
  EXPECT_THROW(GeneratorModel(ok, {{"x", 0, 2, {0.0, 1.0}}}), tunegrid::Error);
  EXPECT_THROW(GeneratorModel(ok, {{"x", 0, 1, {0.0, 1.5}}}), tunegrid::Error);
}

TEST(Statistics, ReducedChi2AtTruthIsOrderOne) {
  const TuneParameters truth{{1.625, 0.5, 3.875, 0.25}};
  const auto set = generate_chunk(model(), truth, 1000000, Seed{2024});
  const auto fit = tunegrid::histo::fit_score_set(set, expected_reference(model(), truth));
  EXPECT_GE(fit.reduced, 0.3);
  EXPECT_LE(fit.reduced, 3.0);
}

}  // namespace
