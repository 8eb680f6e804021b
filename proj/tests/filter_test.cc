#include <cmath>
#include <random>

#include <doctest.h>

#include "ler/error.h"
#include "ler/filter.h"
#include "oracles.h"

using namespace ler;

namespace {

PatternRegistry registry_from(std::vector<double> party, std::size_t dim) {
  PatternRegistry r;
  r.dim = dim;
  r.patterns[0] = std::move(party);
  for (std::size_t k = 1; k < kNumEntityLabels; ++k) r.patterns[k].assign(dim, 1.0);
  return r;
}

struct Instance {
  EmbeddingMatrix m;
  PatternRegistry reg;
  std::vector<EntitySpan> spans;
};

Instance random_instance(std::mt19937_64 &rng, std::size_t max_spans) {
  std::uniform_int_distribution<std::size_t> dim_dist(2, 10), n_spans(0, max_spans),
      len(1, 3), gap(0, 2), lab(0, 3);
  const std::size_t dim = dim_dist(rng);
  std::vector<EntitySpan> spans;
  const std::size_t count = n_spans(rng);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < count; ++i) {
    pos += gap(rng);
    const std::size_t l = len(rng);
    spans.push_back({pos, pos + l, kAllEntityLabels[lab(rng)]});
    pos += l;
  }
  const std::size_t n = pos + 1;
  std::vector<float> values(n * dim);
  std::normal_distribution<float> nd(0.0f, 1.0f);
  for (auto &v : values) v = nd(rng);
  PatternRegistry reg;
  reg.dim = dim;
  for (auto &p : reg.patterns) p = testing::random_vector(rng, dim);
  return {EmbeddingMatrix("doc", n, dim, std::move(values)), std::move(reg), std::move(spans)};
}

}  // namespace

TEST_CASE("cosine examples") {
  const std::vector<double> e1{1, 0, 0};
  CHECK(cosine(e1, e1) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> x{1, 0}, y{0, 1};
  CHECK(cosine(x, y) == 0.0);
  const std::vector<double> a{1, 2, 2}, b{2, 1, 2};
  CHECK(std::abs(cosine(a, b) - 8.0 / 9.0) < 1e-12);

  const std::vector<double> zero{0, 0};
  try {
    cosine(zero, y);
    FAIL("expected error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("first argument") != std::string::npos);
  }
  try {
    cosine(y, zero);
    FAIL("expected error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("second argument") != std::string::npos);
  }
}

TEST_CASE("cosine properties: range, symmetry, positive scale invariance") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> alpha(1e-3, 1e3);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t d = 1 + i % 20;
    const auto a = testing::random_vector(rng, d);
    const auto b = testing::random_vector(rng, d);
    const double s = cosine(a, b);
    CHECK(s >= -1.0 - 1e-9);
    CHECK(s <= 1.0 + 1e-9);
    CHECK(std::abs(s - cosine(b, a)) < 1e-9);
    auto scaled = a;
    const double k = alpha(rng);
    for (double &x : scaled) x *= k;
    CHECK(std::abs(cosine(scaled, b) - s) < 1e-9);
  }
}

TEST_CASE("entity_embedding is the mean of the span rows") {
  const EmbeddingMatrix m("d", 3, 2, {2, 0, 0, 2, 5, 7});
  CHECK(entity_embedding({2, 3, EntityLabel::kParty}, m) == std::vector<double>{5, 7});
  CHECK(entity_embedding({0, 2, EntityLabel::kParty}, m) == std::vector<double>{1, 1});
  const EmbeddingMatrix ones("d", 3, 4, std::vector<float>(12, 1.0f));
  CHECK(entity_embedding({0, 3, EntityLabel::kDate}, ones) == std::vector<double>(4, 1.0));
  CHECK_THROWS_AS(entity_embedding({2, 4, EntityLabel::kDate}, ones), Error);
}

TEST_CASE("filter_entities threshold examples") {
  // Rows A = [1,0] and B = [0,1]; PARTY pattern = A.
  const EmbeddingMatrix m("d", 3, 2, {1, 0, 0, 0, 0, 1});
  const std::vector<EntitySpan> spans{{0, 1, EntityLabel::kParty}, {2, 3, EntityLabel::kParty}};
  const auto reg = registry_from({1, 0}, 2);

  const auto all = filter_entities(spans, m, reg, -1.1);
  CHECK(all.retained == spans);
  CHECK(filter_entities(spans, m, reg, 1.1).retained.empty());

  const auto r = filter_entities(spans, m, reg, 0.9);
  REQUIRE(r.audit.size() == 2);
  CHECK(r.retained == std::vector<EntitySpan>{spans[0]});
  CHECK(r.audit[0].similarity == 1.0);
  CHECK(r.audit[1].similarity == 0.0);
  CHECK(r.audit[0].reason == FilterReason::kAtOrAboveThreshold);
  CHECK(r.audit[1].reason == FilterReason::kBelowThreshold);

  // Retained at equality.
  CHECK(filter_entities(spans, m, reg, 1.0).retained.size() == 1);
  CHECK_THROWS_AS(filter_entities(spans, m, reg, std::nan("")), Error);
  CHECK_THROWS_AS(filter_entities(spans, m, registry_from({1, 0, 0}, 3), 0.0), Error);
}

TEST_CASE("zero-norm entity vectors are discarded with a reason") {
  const EmbeddingMatrix m("d", 2, 2, {0, 0, 1, 1});
  const std::vector<EntitySpan> spans{{0, 1, EntityLabel::kParty}, {1, 2, EntityLabel::kParty}};
  const auto r = filter_entities(spans, m, registry_from({1, 1}, 2), -5.0);
  CHECK(r.retained == std::vector<EntitySpan>{spans[1]});
  CHECK(r.audit[0].reason == FilterReason::kZeroNormEntity);
  CHECK(!r.audit[0].retained);
}

TEST_CASE("filter matches the brute-force oracle") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> tau_dist(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Instance inst = random_instance(rng, 20);
    const double tau = tau_dist(rng);
    const auto got = filter_entities(inst.spans, inst.m, inst.reg, tau);
    const auto want = testing::oracle_filter(inst.spans, inst.m, inst.reg, tau);
    REQUIRE(got.audit.size() == want.size());
    std::vector<EntitySpan> expected;
    for (std::size_t k = 0; k < want.size(); ++k) {
      CHECK(got.audit[k].retained == want[k].retained);
      CHECK(std::abs(got.audit[k].similarity - static_cast<double>(want[k].similarity)) < 1e-12);
      if (want[k].retained) expected.push_back(inst.spans[k]);
    }
    CHECK(got.retained == expected);
  }
}

TEST_CASE("threshold subset monotonicity and pattern scale invariance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> tau_dist(-1.2, 1.2), alpha(1e-2, 1e2);
  for (int i = 0; i < 200; ++i) {
    const Instance inst = random_instance(rng, 20);
    double t1 = tau_dist(rng), t2 = tau_dist(rng);
    if (t1 > t2) std::swap(t1, t2);
    const auto lo = filter_entities(inst.spans, inst.m, inst.reg, t1).retained;
    const auto hi = filter_entities(inst.spans, inst.m, inst.reg, t2).retained;
    for (const auto &s : hi) CHECK(std::find(lo.begin(), lo.end(), s) != lo.end());
    for (const auto &s : lo) CHECK(std::find(inst.spans.begin(), inst.spans.end(), s) != inst.spans.end());

    PatternRegistry scaled = inst.reg;
    for (auto &p : scaled.patterns) {
      const double a = alpha(rng);
      for (double &x : p) x *= a;
    }
    const double tau = tau_dist(rng);
    const auto base = filter_entities(inst.spans, inst.m, inst.reg, tau);
    const auto sc = filter_entities(inst.spans, inst.m, scaled, tau);
    // Decisions agree except when a score sits within rounding of tau.
    for (std::size_t k = 0; k < base.audit.size(); ++k) {
      if (std::abs(base.audit[k].similarity - tau) > 1e-12) {
        CHECK(base.audit[k].retained == sc.audit[k].retained);
      }
    }
  }
}
