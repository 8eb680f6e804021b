#ifndef LER_PIPELINE_H_
#define LER_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ler/classifier.h"
#include "ler/corpus.h"
#include "ler/embedding.h"
#include "ler/eval.h"
#include "ler/filter.h"
#include "ler/patterns.h"

namespace ler {

using EmbeddingSet = std::map<std::string, EmbeddingMatrix>;

struct RunConfig {
  std::size_t docs = 100;
  double noise = 0.4;
  double signal = 0.7;
  std::size_t dim = 16;
  std::uint64_t seed = 42;
  double tau = 0.5;
  std::size_t epochs = 300;
  double lr = 0.5;
  double split_ratio = 0.8;
  std::size_t workers = 1;
  std::optional<std::filesystem::path> corpus;      // synthesize when absent
  std::optional<std::filesystem::path> embeddings;  // pseudo-embed when absent
  std::filesystem::path out = "ler-out";
  double tau_min = -1.1;
  double tau_max = 1.1;
  std::size_t steps = 23;
};

// Throws Error(kInvalidArgument) on an out-of-range field.
void validate_config(const RunConfig &config);

// Digest of everything that determines the trained head and registry.
std::string training_digest(const Corpus &train, std::size_t dim, std::uint64_t seed,
                            std::size_t epochs, double lr);
// Digest shared by every artifact of one evaluation run. Threshold values are
// deliberately excluded so baseline and hybrid reports compare.
std::string run_digest(const Corpus &test, std::size_t dim, std::uint64_t seed,
                       const LinearHead &head, const PatternRegistry &registry);

// Writes `<dir>/<id>.emb` for every document.
void embed_corpus(const Corpus &corpus, const std::filesystem::path &dir,
                  std::size_t dim, std::uint64_t seed, double signal,
                  std::size_t workers = 1);
EmbeddingSet load_embedding_set(const Corpus &corpus, const std::filesystem::path &dir,
                                std::size_t dim, std::size_t workers = 1);

struct DocumentPrediction {
  std::string id;
  std::vector<EntitySpan> baseline;
  std::vector<EntitySpan> hybrid;
  std::vector<ScoredEntity> audit;
};

// Classifies, decodes and filters each document. Output follows corpus order
// for any worker count.
std::vector<DocumentPrediction> extract(const Corpus &corpus, const EmbeddingSet &embeddings,
                                        const LinearHead &head,
                                        const PatternRegistry &registry, double tau,
                                        std::size_t workers = 1);

// Line-delimited JSON, one record per document.
struct PredictionFile {
  std::string digest;
  double tau = 0.0;
  std::vector<DocumentPrediction> documents;
};
std::string format_predictions(const PredictionFile &predictions);
PredictionFile parse_predictions(std::string_view text);
void save_predictions(const PredictionFile &predictions, const std::filesystem::path &path);
PredictionFile load_predictions(const std::filesystem::path &path);

struct Evaluation {
  MetricsReport baseline;
  MetricsReport hybrid;
};

// Scores both prediction sets against the gold spans of `gold`. Throws
// Error(kInternal) if the hybrid output is not a subset of the baseline.
Evaluation evaluate(const Corpus &gold, const PredictionFile &predictions);

struct SweepRow {
  double tau = 0.0;
  Metrics metrics;
  Counts counts;
  std::size_t retained = 0;
};

struct SweepTable {
  std::string digest;
  std::vector<SweepRow> rows;

  // First row with the highest F1.
  const SweepRow &best_f1() const;
};

std::vector<double> tau_grid(double tau_min, double tau_max, std::size_t steps);

SweepTable sweep_tau(const Corpus &test, const EmbeddingSet &embeddings,
                     const LinearHead &head, const PatternRegistry &registry,
                     const std::string &digest, double tau_min, double tau_max,
                     std::size_t steps, std::size_t workers = 1);
std::string format_sweep(const SweepTable &table);

struct RunResult {
  Evaluation evaluation;
  ComparisonTable comparison;
  SweepTable sweep;
  std::string digest;
  std::vector<std::filesystem::path> artifacts;
};

// synth/load -> split -> embed -> train -> extract -> filter -> eval ->
// compare -> sweep. Artifacts land in config.out; on failure the ones
// written by this call are removed.
RunResult run_pipeline(const RunConfig &config);

// The canned configuration used by `ler demo`.
RunConfig demo_config();

}  // namespace ler

#endif  // LER_PIPELINE_H_
