#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "tunegrid/error.hpp"
#include "tunegrid/histo/fit.hpp"
#include "tunegrid/histo/json.hpp"

namespace {

using tunegrid::Error;
using tunegrid::ErrorCode;
using namespace tunegrid::histo;

Histogram hist(std::vector<double> counts, std::uint64_t n, std::vector<double> edges = {}) {
  if (edges.empty()) {
    for (std::size_t i = 0; i <= counts.size(); ++i) edges.push_back(static_cast<double>(i));
  }
  return Histogram{"x", std::move(edges), std::move(counts), n};
}

HistogramSet set_of(Histogram h, tunegrid::tune::TuneParameters p = {{1.0}}) {
  HistogramSet s;
  s.n_events = h.n_events;
  s.params = std::move(p);
  s.histograms.emplace(h.observable, std::move(h));
  return s;
}

ReferenceHistogram ref(std::vector<double> p) {
  std::vector<double> edges;
  for (std::size_t i = 0; i <= p.size(); ++i) edges.push_back(static_cast<double>(i));
  return ReferenceHistogram{"x", std::move(edges), std::move(p)};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected tunegrid::Error";
  return ErrorCode::kIo;
}

TEST(Histogram, FindBinUsesHalfOpenBins) {
  const Histogram h = hist({0, 0}, 0, {0.0, 0.5, 1.0});
  EXPECT_EQ(h.find_bin(0.0), 0);
  EXPECT_EQ(h.find_bin(0.5), 1);
  EXPECT_EQ(h.find_bin(0.999), 1);
  EXPECT_EQ(h.find_bin(1.0), -1);
  EXPECT_EQ(h.find_bin(-0.1), -1);
}

TEST(Histogram, ValidateRejectsBrokenInvariants) {
  EXPECT_EQ(code_of([] { hist({1, 1}, 2, {0, 1, 1}).validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { hist({1, 1}, 1).validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { hist({-1, 1}, 2).validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_NO_THROW(hist({1, 1}, 5).validate());  // out-of-range events allowed
}

TEST(Merge, ElementwiseSum) {
  std::vector<HistogramSet> parts{set_of(hist({3, 1}, 4)), set_of(hist({1, 3}, 4))};
  const HistogramSet m = merge(parts);
  EXPECT_EQ(m.histograms.at("x").counts, (std::vector<double>{4, 4}));
  EXPECT_EQ(m.n_events, 8u);
  EXPECT_EQ(m.histograms.at("x").n_events, 8u);
}

TEST(Merge, SingleElementIsIdentity) {
  const std::vector<HistogramSet> parts{set_of(hist({3, 1}, 7))};
  EXPECT_EQ(merge(parts), parts[0]);
}

TEST(Merge, Errors) {
  EXPECT_EQ(code_of([] { merge(std::vector<HistogramSet>{}); }), ErrorCode::kEmptyInput);
  EXPECT_EQ(code_of([] {
              merge(std::vector<HistogramSet>{set_of(hist({1, 1}, 2)), set_of(hist({1, 1}, 2, {0, 1, 3}))});
            }),
            ErrorCode::kSchemaMismatch);
  EXPECT_EQ(code_of([] {
              merge(std::vector<HistogramSet>{set_of(hist({1, 1}, 2)), set_of(hist({1, 1}, 2), {{2.0}})});
            }),
            ErrorCode::kSchemaMismatch);
}

TEST(Merge, AssociativeAndCommutative) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> count(0, 50);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<HistogramSet> parts;
    const int k = 2 + trial % 5;
    for (int i = 0; i < k; ++i) {
      std::vector<double> c{double(count(rng)), double(count(rng)), double(count(rng))};
      parts.push_back(set_of(hist(c, static_cast<std::uint64_t>(c[0] + c[1] + c[2] + count(rng)))));
    }
    const HistogramSet forward = merge(parts);
    std::vector<HistogramSet> shuffled = parts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(merge(shuffled), forward);
    // ((p0 + p1) + rest) == (p0 + (p1 + rest))
    std::vector<HistogramSet> tail(parts.begin() + 1, parts.end());
    std::vector<HistogramSet> grouped{parts[0], merge(tail)};
    EXPECT_EQ(merge(grouped), forward);
  }
}

TEST(Chi2Exact, PerfectAgreementIsZero) {
  const FitScore s = chi2_exact(hist({25, 75}, 100), ref({0.25, 0.75}));
  EXPECT_EQ(s.chi2, 0.0);
  EXPECT_EQ(s.ndf, 1);
  EXPECT_EQ(s.reduced, 0.0);
}

TEST(Chi2Exact, HandEvaluatedPearson) {
  // (60-50)^2/50 + (40-50)^2/50
  const FitScore s = chi2_exact(hist({60, 40}, 100), ref({0.5, 0.5}));
  EXPECT_DOUBLE_EQ(s.chi2, 4.0);
  EXPECT_EQ(s.ndf, 1);
  EXPECT_DOUBLE_EQ(s.reduced, 4.0);
}

TEST(Chi2Exact, ZeroProbabilityBinExcluded) {
  const FitScore s = chi2_exact(hist({25, 75, 0}, 100), ref({0.25, 0.75, 0.0}));
  EXPECT_EQ(s.chi2, 0.0);
  EXPECT_EQ(s.ndf, 1);
}

TEST(Chi2Exact, Errors) {
  EXPECT_EQ(code_of([] { chi2_exact(hist({1, 1, 1}, 3), ref({0.5, 0.5})); }), ErrorCode::kSchemaMismatch);
  EXPECT_EQ(code_of([] { chi2_exact(hist({1, 1}, 2), ref({1.0, 0.0})); }), ErrorCode::kDegenerateReference);
  EXPECT_EQ(code_of([] { chi2_exact(hist({0, 0}, 0), ref({0.5, 0.5})); }), ErrorCode::kInvalidArgument);
}

TEST(Chi2Exact, PerturbationChangesChi2Quadratically) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::uint64_t n = 2000;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p{u(rng) + 0.1, u(rng) + 0.1, u(rng) + 0.1, u(rng) + 0.1};
    const double total = p[0] + p[1] + p[2] + p[3];
    for (double& x : p) x /= total;
    std::vector<double> o(4);
    for (double& x : o) x = std::floor(40 + u(rng) * 400);
    const std::size_t bin = trial % 4;
    const double delta = std::floor((u(rng) - 0.5) * 40.0);
    const double np = double(n) * p[bin];
    const double expected = (2 * delta * (o[bin] - np) + delta * delta) / np;

    const FitScore before = chi2_exact(hist(o, n), ref(p));
    o[bin] += delta;
    const FitScore after = chi2_exact(hist(o, n), ref(p));
    EXPECT_NEAR(after.chi2 - before.chi2, expected, 1e-9 * std::max(1.0, before.chi2));
    EXPECT_GE(after.chi2, 0.0);
    EXPECT_GE(after.ndf, 1);
  }
}

TEST(Chi2Empirical, IdenticalIsZero) {
  const Histogram h = hist({12, 8, 3}, 30);
  EXPECT_EQ(chi2_empirical(h, h).chi2, 0.0);
}

TEST(Chi2Empirical, ScaleInvariantForEqualShapes) {
  const FitScore s = chi2_empirical(hist({10, 10}, 20), hist({20, 20}, 40));
  EXPECT_EQ(s.chi2, 0.0);
  EXPECT_EQ(s.ndf, 1);
}

TEST(Chi2Empirical, HandEvaluated) {
  // 4/(12+10) + 4/(8+10)
  const FitScore s = chi2_empirical(hist({12, 8}, 20), hist({10, 10}, 20));
  EXPECT_NEAR(s.chi2, 0.40404040404040403, 1e-15);
  EXPECT_EQ(s.ndf, 1);
}

TEST(Chi2Empirical, SymmetricUnderSwap) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> c(0, 200);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> o{double(c(rng)), double(c(rng)), double(c(rng))};
    std::vector<double> r{double(c(rng)) + 1, double(c(rng)), double(c(rng)) + 1};
    const auto no = static_cast<std::uint64_t>(o[0] + o[1] + o[2] + 1);
    const auto nr = static_cast<std::uint64_t>(r[0] + r[1] + r[2] + 5);
    const double ab = chi2_empirical(hist(o, no), hist(r, nr)).chi2;
    const double ba = chi2_empirical(hist(r, nr), hist(o, no)).chi2;
    EXPECT_NEAR(ab, ba, 1e-9 * std::max(1.0, ab));
  }
}

TEST(Chi2Empirical, ZeroBinsExcluded) {
  const FitScore s = chi2_empirical(hist({5, 0, 5}, 10), hist({5, 0, 5}, 10));
  EXPECT_EQ(s.ndf, 1);
  EXPECT_EQ(code_of([] { chi2_empirical(hist({5, 0}, 5), hist({5, 0}, 5)); }), ErrorCode::kDegenerateReference);
}

TEST(FitScoreSet, SingletonEqualsChi2Exact) {
  const Histogram h = hist({60, 40}, 100);
  const FitScore s = fit_score_set(set_of(h), {{"x", ref({0.5, 0.5})}});
  EXPECT_EQ(s, chi2_exact(h, ref({0.5, 0.5})));
}

TEST(FitScoreSet, AdditiveAcrossObservables) {
  HistogramSet s = set_of(hist({60, 40}, 100));
  Histogram y = hist({40, 60}, 100);
  y.observable = "y";
  s.histograms.emplace("y", y);
  ReferenceHistogram ry = ref({0.5, 0.5});
  ry.observable = "y";
  const FitScore f = fit_score_set(s, {{"x", ref({0.5, 0.5})}, {"y", ry}});
  EXPECT_DOUBLE_EQ(f.chi2, 8.0);
  EXPECT_EQ(f.ndf, 2);
  EXPECT_DOUBLE_EQ(f.reduced, 4.0);
}

TEST(FitScoreSet, PerfectAgreementAndMissingReference) {
  EXPECT_EQ(fit_score_set(set_of(hist({50, 50}, 100)), {{"x", ref({0.5, 0.5})}}).reduced, 0.0);
  EXPECT_EQ(code_of([] { fit_score_set(set_of(hist({50, 50}, 100)), {}); }), ErrorCode::kMissingReference);
}

TEST(HistogramJson, FieldNamesAndRoundTrip) {
  const HistogramSet s = set_of(hist({0.1, 2.5}, 9), {{0.3, 1.0 / 3.0}});
  const nlohmann::json j = s;
  const auto& h = j.at("histograms").at(0);
  EXPECT_TRUE(h.contains("observable") && h.contains("edges") && h.contains("counts") && h.contains("n_events"));
  EXPECT_EQ(nlohmann::json::parse(j.dump()).get<HistogramSet>(), s);
}

}  // namespace
