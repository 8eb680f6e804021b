// Acceptance harness: one PASS/FAIL line per criterion, exit status 0 only
// when all of them pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "ler/classifier.h"
#include "ler/error.h"
#include "ler/eval.h"
#include "ler/filter.h"
#include "ler/pipeline.h"
#include "oracles.h"

using namespace ler;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name) {
  const auto p = fs::temp_directory_path() / ("ler_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

Outcome metric_arithmetic() {
  Outcome o;
  const double f_base = f1_score(0.902, 0.884) * 100;
  const double f_hyb = f1_score(0.941, 0.927) * 100;
  o.require(std::abs(f_base - 89.3) <= 0.05, fmt::format("baseline F1 {:.4f}", f_base));
  o.require(std::abs(f_hyb - 93.4) <= 0.05, fmt::format("hybrid F1 {:.4f}", f_hyb));
  if (o.pass) o.detail = fmt::format("F1 {:.3f} and {:.3f}", f_base, f_hyb);
  return o;
}

Outcome directional_experiment() {
  Outcome o;
  RunConfig config = demo_config();
  config.out = scratch("demo");
  config.workers = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = run_pipeline(config);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  fs::remove_all(config.out);

  const auto &base = r.evaluation.baseline.micro;
  const auto &best = r.sweep.best_f1();
  const double dp = (best.metrics.precision - base.precision) * 100;
  o.require(config.docs >= 100 && config.noise >= 0.3 && config.signal >= 0.7 &&
                config.dim == 16,
            "demo config outside the required regime");
  o.require(dp >= 3.0, fmt::format("precision gain {:.2f} pts at tau {:.2f}", dp, best.tau));
  o.require(best.metrics.recall <= base.recall, "hybrid recall above baseline");
  o.require(secs < 60.0, fmt::format("took {:.1f} s", secs));
  if (o.pass) {
    o.detail = fmt::format("tau {:.2f}: P {:.1f} -> {:.1f}, R {:.1f} -> {:.1f}, {:.2f} s",
                           best.tau, base.precision * 100, best.metrics.precision * 100,
                           base.recall * 100, best.metrics.recall * 100, secs);
  }
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim_dist(2, 16), n_spans(0, 20), len(1, 3),
      gap(0, 2), lab(0, 3);
  std::uniform_real_distribution<double> tau_dist(-1.0, 1.0);
  std::normal_distribution<float> nd(0.0f, 1.0f);
  std::size_t decisions = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t dim = dim_dist(rng);
    std::vector<EntitySpan> spans;
    std::size_t pos = 0;
    const std::size_t count = n_spans(rng);
    for (std::size_t k = 0; k < count; ++k) {
      pos += gap(rng);
      const std::size_t l = len(rng);
      spans.push_back({pos, pos + l, kAllEntityLabels[lab(rng)]});
      pos += l;
    }
    std::vector<float> values((pos + 1) * dim);
    for (auto &v : values) v = nd(rng);
    const EmbeddingMatrix m("doc", pos + 1, dim, std::move(values));
    PatternRegistry reg;
    reg.dim = dim;
    for (auto &p : reg.patterns) p = testing::random_vector(rng, dim);
    const double tau = tau_dist(rng);

    const auto got = filter_entities(spans, m, reg, tau);
    const auto want = testing::oracle_filter(spans, m, reg, tau);
    o.require(got.audit.size() == want.size(), "audit length differs");
    std::vector<EntitySpan> kept;
    for (std::size_t k = 0; k < want.size() && k < got.audit.size(); ++k) {
      o.require(got.audit[k].retained == want[k].retained,
                fmt::format("instance {} span {} decision differs", i, k));
      worst = std::max(worst, std::abs(got.audit[k].similarity -
                                       static_cast<double>(want[k].similarity)));
      if (want[k].retained) kept.push_back(spans[k]);
      ++decisions;
    }
    o.require(got.retained == kept, fmt::format("instance {} retained set differs", i));
  }
  o.require(worst <= 1e-12, fmt::format("similarity error {:.3g}", worst));
  if (o.pass) o.detail = fmt::format("{} decisions, max similarity error {:.2g}", decisions, worst);
  return o;
}

Outcome invariant_suites() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> shift(-50, 50), alpha(1e-3, 1e3), tau_dist(-1.2, 1.2);

  for (int i = 0; i < 500; ++i) {
    const auto z = testing::random_vector(rng, 5, 10.0);
    const auto p = softmax(z);
    double sum = 0;
    for (double x : p) sum += x;
    o.require(std::abs(sum - 1.0) <= 1e-9, "softmax does not sum to 1");
    auto zs = z;
    const double c = shift(rng);
    for (double &x : zs) x += c;
    const auto ps = softmax(zs);
    for (std::size_t k = 0; k < p.size(); ++k) {
      o.require(std::abs(p[k] - ps[k]) <= 1e-9, "softmax not shift invariant");
    }
  }

  for (int i = 0; i < 500; ++i) {
    const std::size_t d = 1 + i % 16;
    const auto a = testing::random_vector(rng, d);
    const auto b = testing::random_vector(rng, d);
    const double s = cosine(a, b);
    o.require(s >= -1 - 1e-9 && s <= 1 + 1e-9, "cosine out of range");
    o.require(std::abs(s - cosine(b, a)) <= 1e-9, "cosine not symmetric");
    auto as = a;
    const double k = alpha(rng);
    for (double &x : as) x *= k;
    o.require(std::abs(s - cosine(as, b)) <= 1e-9, "cosine not scale invariant");
  }

  const Corpus docs = synth_corpus(20, 0.5, 3);
  for (const auto &doc : docs) {
    const auto m = pseudo_embed(doc, 8, 3, 0.5);
    PatternRegistry reg;
    reg.dim = 8;
    for (auto &p : reg.patterns) p = testing::random_vector(rng, 8);
    double t1 = tau_dist(rng), t2 = tau_dist(rng);
    if (t1 > t2) std::swap(t1, t2);
    const auto lo = filter_entities(doc.gold_entities, m, reg, t1).retained;
    const auto hi = filter_entities(doc.gold_entities, m, reg, t2).retained;
    for (const auto &s : hi) {
      o.require(std::find(lo.begin(), lo.end(), s) != lo.end(), "tau subset monotonicity");
    }

    const auto labels = encode_labels(doc.gold_entities, doc.tokens.size());
    o.require(decode_labels(labels) == doc.gold_entities, "IO span round trip");

    const auto bytes = encode_embeddings(m);
    o.require(encode_embeddings(decode_embeddings(bytes, doc.id)) == bytes,
              "embedding file round trip");
  }

  std::uniform_int_distribution<std::size_t> cnt(0, 40);
  for (int i = 0; i < 1000; ++i) {
    const Counts c{cnt(rng), cnt(rng), cnt(rng)};
    const auto m = compute_metrics(c);
    const double denom = 2.0 * c.tp + c.fp + c.fn;
    const double f = denom == 0 ? 0.0 : 2.0 * c.tp / denom;
    o.require(std::abs(m.f1 - f) <= 1e-12, "F1 identity");
    o.require(m.f1 <= std::max(m.precision, m.recall) + 1e-12, "F1 above max(P, R)");
  }

  RunConfig config = demo_config();
  config.docs = 40;
  config.out = scratch("det_a");
  run_pipeline(config);
  const fs::path a = config.out;
  config.out = scratch("det_b");
  run_pipeline(config);
  std::size_t files = 0;
  for (const auto &entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a);
    o.require(slurp(entry.path()) == slurp(config.out / rel), "rerun differs: " + rel.string());
    ++files;
  }
  fs::remove_all(a);
  fs::remove_all(config.out);
  if (o.pass) o.detail = fmt::format("all suites green, {} artifacts byte-identical", files);
  return o;
}

Outcome gradient_check() {
  Outcome o;
  std::mt19937_64 rng(5150);
  std::uniform_int_distribution<std::size_t> dim_dist(1, 16), label_dist(0, kNumClasses - 1);
  const double h = 1e-5;
  double worst = 0.0;
  auto rel = [](double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-7});
  };
  for (int inst = 0; inst < 50; ++inst) {
    TokenSamples s;
    s.dim = dim_dist(rng);
    s.features = testing::random_vector(rng, s.dim);
    s.labels = {label_dist(rng)};
    const auto w = testing::random_vector(rng, kNumClasses * s.dim, 0.5);
    const auto b = testing::random_vector(rng, kNumClasses, 0.5);
    const auto g = cross_entropy_gradient(w, b, kNumClasses, s);
    auto loss = [&](const std::vector<double> &ww, const std::vector<double> &bb) {
      return cross_entropy_gradient(ww, bb, kNumClasses, s).loss;
    };
    for (std::size_t k = 0; k < w.size(); ++k) {
      auto wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      worst = std::max(worst, rel(g.d_weights[k], (loss(wp, b) - loss(wm, b)) / (2 * h)));
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      auto bp = b, bm = b;
      bp[c] += h;
      bm[c] -= h;
      worst = std::max(worst, rel(g.d_bias[c], (loss(w, bp) - loss(w, bm)) / (2 * h)));
    }
  }
  o.require(worst < 1e-4, fmt::format("relative error {:.3g}", worst));
  if (o.pass) o.detail = fmt::format("50 instances, max relative error {:.2g}", worst);
  return o;
}

Outcome trainability() {
  Outcome o;
  const Corpus docs = synth_corpus(30, 0.0, 17);
  std::map<std::string, EmbeddingMatrix> emb;
  for (const auto &d : docs) emb.emplace(d.id, pseudo_embed(d, 8, 17, 1.0));
  TokenSamples all = collect_samples(docs, emb);
  o.require(all.size() >= 200, "not enough tokens");
  TokenSamples s;
  s.dim = 8;
  s.labels.assign(all.labels.begin(), all.labels.begin() + 200);
  s.features.assign(all.features.begin(), all.features.begin() + 200 * 8);

  const LinearHead head = train_head(s, {500, 0.5, 17, nullptr});
  std::vector<Eigen::VectorXd> x;
  std::vector<int> y;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(&s.features[i * 8], 8);
    x.push_back(h);
    y.push_back(static_cast<int>(s.labels[i]));
    std::vector<double> z(kNumClasses);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      z[c] = head.bias[c];
      for (std::size_t j = 0; j < 8; ++j) z[c] += head.weight(c, j) * h[j];
    }
    correct += argmax(z) == s.labels[i];
  }
  const testing::MlrOracle oracle(x, y, kNumClasses, 500, 0.5, 17);
  std::size_t oracle_correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) oracle_correct += oracle.predict(x[i]) == y[i];
  const double acc = 100.0 * correct / s.size();
  const double oracle_acc = 100.0 * oracle_correct / s.size();
  o.require(acc >= 99.0, fmt::format("accuracy {:.1f}%", acc));
  o.require(std::abs(acc - oracle_acc) <= 1.0,
            fmt::format("accuracy {:.1f}% vs oracle {:.1f}%", acc, oracle_acc));
  if (o.pass) o.detail = fmt::format("accuracy {:.1f}%, oracle {:.1f}%", acc, oracle_acc);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 metric arithmetic", metric_arithmetic},
      {"2 directional experiment", directional_experiment},
      {"3 filter oracle equivalence", oracle_equivalence},
      {"4 invariant suites", invariant_suites},
      {"5 gradient check", gradient_check},
      {"6 trainability", trainability},
  };
  int failures = 0;
  for (const auto &[name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s  criterion %-28s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
