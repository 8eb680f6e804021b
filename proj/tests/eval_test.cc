#include <random>
#include <set>

#include <doctest.h>

#include "ler/error.h"
#include "ler/eval.h"

using namespace ler;

namespace {

constexpr auto P = EntityLabel::kParty;
constexpr auto D = EntityLabel::kDate;
constexpr auto M = EntityLabel::kMoney;

// Pairwise count of exact matches, independent of match_spans.
Counts brute_counts(const std::vector<EntitySpan> &pred, const std::vector<EntitySpan> &gold) {
  Counts c;
  for (const auto &p : pred) {
    bool hit = false;
    for (const auto &g : gold) hit = hit || p == g;
    hit ? ++c.tp : ++c.fp;
  }
  for (const auto &g : gold) {
    bool hit = false;
    for (const auto &p : pred) hit = hit || p == g;
    if (!hit) ++c.fn;
  }
  return c;
}

std::vector<EntitySpan> random_spans(std::mt19937_64 &rng, std::size_t n_tokens) {
  std::vector<EntitySpan> out;
  std::uniform_int_distribution<int> skip(0, 3), len(1, 3), lab(0, 3);
  std::size_t pos = skip(rng);
  while (true) {
    const std::size_t l = len(rng);
    if (pos + l > n_tokens) break;
    out.push_back({pos, pos + l, kAllEntityLabels[lab(rng)]});
    pos += l + skip(rng);
  }
  return out;
}

MetricsReport report_from(Counts c, const std::string &model, const std::string &digest = "x") {
  MatchCounts mc;
  mc.per_class[0] = c;
  return compute_metrics(mc, model, 0.5, digest);
}

}  // namespace

TEST_CASE("match_spans worked example") {
  const std::vector<EntitySpan> gold{{0, 2, P}, {3, 4, D}, {5, 7, M}, {8, 9, P}};
  // Two exact, one with a boundary error.
  const std::vector<EntitySpan> pred{{0, 2, P}, {3, 4, D}, {5, 6, M}};
  const auto c = match_spans(pred, gold).micro();
  CHECK(c == Counts{2, 1, 2});
  // Label mismatch is a miss.
  CHECK(match_spans(std::vector<EntitySpan>{{0, 2, D}}, std::vector<EntitySpan>{{0, 2, P}}).micro() ==
        Counts{0, 1, 1});
  CHECK(match_spans({}, {}).micro() == Counts{});
  CHECK_THROWS_AS(match_spans(std::vector<EntitySpan>{{0, 2, P}, {1, 3, D}}, gold), Error);
}

TEST_CASE("match_spans properties") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 500; ++i) {
    const auto pred = random_spans(rng, 30);
    const auto gold = random_spans(rng, 30);
    const auto mc = match_spans(pred, gold);
    CHECK(mc.micro() == brute_counts(pred, gold));
    Counts sum;
    for (const auto &c : mc.per_class) sum += c;
    CHECK(sum == mc.micro());
    CHECK(mc.micro().tp + mc.micro().fp == pred.size());
    CHECK(mc.micro().tp + mc.micro().fn == gold.size());
    // Swapping roles swaps fp and fn.
    const auto sw = match_spans(gold, pred).micro();
    CHECK(sw.tp == mc.micro().tp);
    CHECK(sw.fp == mc.micro().fn);
    CHECK(sw.fn == mc.micro().fp);
    CHECK(match_spans(gold, gold).micro() == Counts{gold.size(), 0, 0});
  }
}

TEST_CASE("compute_metrics examples") {
  const auto m = compute_metrics(Counts{2, 1, 2});
  CHECK(m.precision == doctest::Approx(2.0 / 3));
  CHECK(m.recall == doctest::Approx(0.5));
  CHECK(m.f1 == doctest::Approx(4.0 / 7));
  const auto z = compute_metrics(Counts{0, 0, 0});
  CHECK(z.precision == 0.0);
  CHECK(z.recall == 0.0);
  CHECK(z.f1 == 0.0);
  CHECK(compute_metrics(Counts{0, 3, 0}).precision == 0.0);
  CHECK(compute_metrics(Counts{5, 0, 0}).f1 == 1.0);
}

TEST_CASE("published table arithmetic is self-consistent") {
  CHECK(std::abs(f1_score(0.902, 0.884) - 0.893) < 0.0005);
  CHECK(std::abs(f1_score(0.941, 0.927) - 0.934) < 0.0005);
  CHECK(f1_score(0.0, 0.0) == 0.0);
}

TEST_CASE("metric identities on random counts") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> d(0, 50);
  for (int i = 0; i < 2000; ++i) {
    const Counts c{d(rng), d(rng), d(rng)};
    const auto m = compute_metrics(c);
    CHECK(m.precision >= 0.0);
    CHECK(m.precision <= 1.0);
    CHECK(m.recall >= 0.0);
    CHECK(m.recall <= 1.0);
    CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-12);
    CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-12);
    const double denom = 2.0 * c.tp + c.fp + c.fn;
    CHECK(m.f1 == doctest::Approx(denom == 0 ? 0.0 : 2.0 * c.tp / denom));
  }
}

TEST_CASE("compare_reports deltas and drop flags") {
  // Counts chosen to land near 90.2/88.4 and 94.1/92.7.
  MetricsReport b = report_from(Counts{}, "baseline");
  MetricsReport h = report_from(Counts{}, "hybrid");
  b.micro = {0.902, 0.884, 0.893};
  h.micro = {0.941, 0.927, 0.934};
  const auto t = compare_reports(b, h);
  CHECK(t.delta_precision == doctest::Approx(3.9));
  CHECK(t.delta_recall == doctest::Approx(4.3));
  CHECK(t.delta_f1 == doctest::Approx(4.1));
  CHECK(!t.precision_dropped);
  CHECK(!t.recall_dropped);

  const auto same = compare_reports(b, b);
  CHECK(same.delta_precision == 0.0);
  CHECK(same.delta_recall == 0.0);
  CHECK(same.delta_f1 == 0.0);

  const auto base = report_from(Counts{10, 2, 3}, "baseline");
  const auto fewer = report_from(Counts{9, 2, 4}, "hybrid");
  const auto drop = compare_reports(base, fewer);
  CHECK(drop.recall_dropped);
  CHECK(drop.delta_recall < 0);
  CHECK(render_table(drop).find("(!)") != std::string::npos);

  try {
    compare_reports(base, report_from(Counts{9, 2, 4}, "hybrid", "other"));
    FAIL("expected digest mismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kDigestMismatch);
  }
}

TEST_CASE("render_table layout") {
  const auto t = compare_reports(report_from(Counts{8, 2, 2}, "baseline"),
                                 report_from(Counts{8, 1, 2}, "hybrid"));
  const std::string s = render_table(t);
  CHECK(s.find("Precision") != std::string::npos);
  CHECK(s.find("F1 Score") != std::string::npos);
  CHECK(s.find("80.0%") != std::string::npos);
  CHECK(s.find("88.9%") != std::string::npos);
}

TEST_CASE("report file round trip") {
  MatchCounts mc;
  mc.per_class = {Counts{3, 1, 2}, Counts{4, 0, 1}, Counts{0, 0, 0}, Counts{7, 2, 0}};
  const auto r = compute_metrics(mc, "hybrid", 0.25, "abc");
  const auto back = parse_report(format_report(r));
  CHECK(back.model == "hybrid");
  CHECK(back.tau == 0.25);
  CHECK(back.digest == "abc");
  CHECK(back.counts == r.counts);
  CHECK(std::abs(back.micro.f1 - r.micro.f1) <= 5e-5);
  for (std::size_t k = 0; k < kNumEntityLabels; ++k) {
    CHECK(std::abs(back.per_class[k].precision - r.per_class[k].precision) <= 5e-5);
  }
  CHECK_THROWS_AS(parse_report("{}"), Error);
  CHECK_THROWS_AS(parse_report("not json"), Error);
}
