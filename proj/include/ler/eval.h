#ifndef LER_EVAL_H_
#define LER_EVAL_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ler/types.h"

namespace ler {

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  Counts &operator+=(const Counts &o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts &, const Counts &) = default;
};

struct MatchCounts {
  std::array<Counts, kNumEntityLabels> per_class{};

  Counts micro() const;
  const Counts &of(EntityLabel label) const { return per_class[label_index(label)]; }
  MatchCounts &operator+=(const MatchCounts &o);
  friend bool operator==(const MatchCounts &, const MatchCounts &) = default;
};

// Exact (start, end, label) matching. Throws Error(kInvalidArgument) if
// either list contains overlapping spans.
MatchCounts match_spans(std::span<const EntitySpan> pred, std::span<const EntitySpan> gold);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// P = tp/(tp+fp), R = tp/(tp+fn), each 0 on an empty denominator.
Metrics compute_metrics(const Counts &counts);
// Harmonic mean, 0 when p + r == 0.
double f1_score(double precision, double recall);

struct MetricsReport {
  std::string model;  // "baseline", "hybrid", ...
  std::optional<double> tau;
  std::string digest;
  MatchCounts counts;
  std::array<Metrics, kNumEntityLabels> per_class{};
  Metrics micro;
};

MetricsReport compute_metrics(const MatchCounts &counts, std::string model,
                              std::optional<double> tau, std::string digest);

struct ComparisonRow {
  std::string model;
  Metrics metrics;
};

struct ComparisonTable {
  ComparisonRow baseline;
  ComparisonRow hybrid;
  std::optional<double> tau;
  std::string digest;
  // hybrid - baseline, in percentage points.
  double delta_precision = 0.0;
  double delta_recall = 0.0;
  double delta_f1 = 0.0;
  bool precision_dropped = false;
  bool recall_dropped = false;
  bool f1_dropped = false;
};

// Throws Error(kDigestMismatch) when the reports come from different runs.
ComparisonTable compare_reports(const MetricsReport &baseline, const MetricsReport &hybrid);

// Plain-text table, percentages at one decimal.
std::string render_table(const ComparisonTable &table);

// Report file: JSON, metrics rounded to 4 decimals.
std::string format_report(const MetricsReport &report);
MetricsReport parse_report(std::string_view text);
void save_report(const MetricsReport &report, const std::filesystem::path &path);
MetricsReport load_report(const std::filesystem::path &path);

}  // namespace ler

#endif  // LER_EVAL_H_
