#include "ler/eval.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <fmt/core.h>
#include <json.hpp>

#include "ler/error.h"
#include "util.h"

namespace ler {
namespace {

using internal::fail;
using json = nlohmann::ordered_json;
constexpr std::string_view kModule = "eval";

void require_disjoint(std::span<const EntitySpan> spans, std::string_view which) {
  std::vector<EntitySpan> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end(), [](const EntitySpan &a, const EntitySpan &b) {
    return std::tie(a.start_token, a.end_token) < std::tie(b.start_token, b.end_token);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (overlaps(sorted[i - 1], sorted[i])) {
      fail(ErrorCode::kInvalidArgument, kModule,
           fmt::format("overlapping {} spans [{},{}) and [{},{})", which,
                       sorted[i - 1].start_token, sorted[i - 1].end_token,
                       sorted[i].start_token, sorted[i].end_token));
    }
  }
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

json counts_json(const Counts &c, const Metrics &m) {
  return {{"tp", c.tp},
          {"fp", c.fp},
          {"fn", c.fn},
          {"precision", round4(m.precision)},
          {"recall", round4(m.recall)},
          {"f1", round4(m.f1)}};
}

void read_block(const json &j, Counts &c, Metrics &m) {
  c.tp = j.at("tp").get<std::size_t>();
  c.fp = j.at("fp").get<std::size_t>();
  c.fn = j.at("fn").get<std::size_t>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
}

std::string pct(double x) { return fmt::format("{:.1f}%", 100.0 * x); }

std::string delta(double points, bool dropped) {
  return fmt::format("{:+.1f}{}", points, dropped ? " (!)" : "");
}

}  // namespace

Counts MatchCounts::micro() const {
  Counts total;
  for (const Counts &c : per_class) total += c;
  return total;
}

MatchCounts &MatchCounts::operator+=(const MatchCounts &o) {
  for (std::size_t k = 0; k < kNumEntityLabels; ++k) per_class[k] += o.per_class[k];
  return *this;
}

MatchCounts match_spans(std::span<const EntitySpan> pred, std::span<const EntitySpan> gold) {
  require_disjoint(pred, "predicted");
  require_disjoint(gold, "gold");
  // Within a disjoint list no two spans share boundaries, so a set lookup
  // can match each gold span at most once.
  std::set<EntitySpan> gold_set(gold.begin(), gold.end());
  MatchCounts counts;
  for (const EntitySpan &p : pred) {
    Counts &c = counts.per_class[label_index(p.label)];
    if (gold_set.erase(p) > 0) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  for (const EntitySpan &g : gold_set) ++counts.per_class[label_index(g.label)].fn;
  return counts;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

Metrics compute_metrics(const Counts &counts) {
  Metrics m;
  const auto tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) m.precision = tp / static_cast<double>(counts.tp + counts.fp);
  if (counts.tp + counts.fn > 0) m.recall = tp / static_cast<double>(counts.tp + counts.fn);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

MetricsReport compute_metrics(const MatchCounts &counts, std::string model,
                              std::optional<double> tau, std::string digest) {
  MetricsReport report;
  report.model = std::move(model);
  report.tau = tau;
  report.digest = std::move(digest);
  report.counts = counts;
  for (std::size_t k = 0; k < kNumEntityLabels; ++k) {
    report.per_class[k] = compute_metrics(counts.per_class[k]);
  }
  report.micro = compute_metrics(counts.micro());
  return report;
}

ComparisonTable compare_reports(const MetricsReport &baseline, const MetricsReport &hybrid) {
  if (baseline.digest != hybrid.digest) {
    fail(ErrorCode::kDigestMismatch, kModule,
         fmt::format("reports come from different runs: digest {} vs {}",
                     baseline.digest, hybrid.digest));
  }
  ComparisonTable t;
  t.baseline = {baseline.model, baseline.micro};
  t.hybrid = {hybrid.model, hybrid.micro};
  t.tau = hybrid.tau;
  t.digest = hybrid.digest;
  t.delta_precision = 100.0 * (hybrid.micro.precision - baseline.micro.precision);
  t.delta_recall = 100.0 * (hybrid.micro.recall - baseline.micro.recall);
  t.delta_f1 = 100.0 * (hybrid.micro.f1 - baseline.micro.f1);
  t.precision_dropped = hybrid.micro.precision < baseline.micro.precision;
  t.recall_dropped = hybrid.micro.recall < baseline.micro.recall;
  t.f1_dropped = hybrid.micro.f1 < baseline.micro.f1;
  return t;
}

std::string render_table(const ComparisonTable &t) {
  constexpr auto kRow = "{:<14}{:>12}{:>12}{:>12}\n";
  std::string out = fmt::format(kRow, "Model", "Precision", "Recall", "F1 Score");
  for (const ComparisonRow *row : {&t.baseline, &t.hybrid}) {
    out += fmt::format(kRow, row->model, pct(row->metrics.precision),
                       pct(row->metrics.recall), pct(row->metrics.f1));
  }
  out += fmt::format(kRow, "Delta (pts)", delta(t.delta_precision, t.precision_dropped),
                     delta(t.delta_recall, t.recall_dropped),
                     delta(t.delta_f1, t.f1_dropped));
  out += fmt::format("tau: {}\ndigest: {}\n",
                     t.tau ? fmt::format("{}", *t.tau) : std::string("none"), t.digest);
  return out;
}

std::string format_report(const MetricsReport &report) {
  json j;
  j["model"] = report.model;
  j["tau"] = report.tau ? json(*report.tau) : json(nullptr);
  j["digest"] = report.digest;
  j["micro"] = counts_json(report.counts.micro(), report.micro);
  json classes = json::object();
  for (EntityLabel label : kAllEntityLabels) {
    const std::size_t k = label_index(label);
    classes[std::string(label_name(label))] =
        counts_json(report.counts.per_class[k], report.per_class[k]);
  }
  j["classes"] = std::move(classes);
  return j.dump(2) + "\n";
}

MetricsReport parse_report(std::string_view text) {
  MetricsReport r;
  try {
    const json j = json::parse(text);
    r.model = j.at("model").get<std::string>();
    if (!j.at("tau").is_null()) r.tau = j.at("tau").get<double>();
    r.digest = j.at("digest").get<std::string>();
    Counts micro_counts;
    read_block(j.at("micro"), micro_counts, r.micro);
    for (EntityLabel label : kAllEntityLabels) {
      const std::size_t k = label_index(label);
      read_block(j.at("classes").at(std::string(label_name(label))),
                 r.counts.per_class[k], r.per_class[k]);
    }
    if (!(micro_counts == r.counts.micro())) {
      fail(ErrorCode::kFormat, kModule, "micro counts differ from the per-class sum");
    }
  } catch (const json::exception &e) {
    fail(ErrorCode::kFormat, kModule, std::string("malformed report: ") + e.what());
  }
  return r;
}

void save_report(const MetricsReport &report, const std::filesystem::path &path) {
  internal::write_file_atomic(path, format_report(report), kModule);
}

MetricsReport load_report(const std::filesystem::path &path) {
  return parse_report(internal::read_file(path, kModule));
}

}  // namespace ler
