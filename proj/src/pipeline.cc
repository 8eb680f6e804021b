#include "ler/pipeline.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/core.h>
#include <json.hpp>

#include "ler/error.h"
#include "util.h"

namespace ler {
namespace {

using internal::fail;
using json = nlohmann::ordered_json;
constexpr std::string_view kModule = "pipeline";

json spans_json(const std::vector<EntitySpan> &spans) {
  json arr = json::array();
  for (const auto &s : spans) {
    arr.push_back({{"start_token", s.start_token},
                   {"end_token", s.end_token},
                   {"label", label_name(s.label)}});
  }
  return arr;
}

EntitySpan span_from_json(const json &j) {
  const auto name = j.at("label").get<std::string>();
  const auto label = parse_label(name);
  if (!label) fail(ErrorCode::kFormat, kModule, "unknown label \"" + name + "\"");
  return {j.at("start_token").get<std::size_t>(), j.at("end_token").get<std::size_t>(),
          *label};
}

double round6(double x) { return std::round(x * 1e6) / 1e6; }

// Files written by run_pipeline; removed again unless committed.
class ArtifactGuard {
 public:
  explicit ArtifactGuard(std::vector<std::filesystem::path> &paths) : paths_(paths) {}
  ~ArtifactGuard() {
    if (committed_) return;
    for (const auto &p : paths_) {
      std::error_code ignored;
      std::filesystem::remove_all(p, ignored);
    }
  }
  void add(const std::filesystem::path &p) { paths_.push_back(p); }
  void commit() { committed_ = true; }

 private:
  std::vector<std::filesystem::path> &paths_;
  bool committed_ = false;
};

}  // namespace

void validate_config(const RunConfig &c) {
  auto bad = [](const std::string &what) { fail(ErrorCode::kInvalidArgument, "cli", what); };
  if (c.dim < 2) bad(fmt::format("dim must be >= 2, got {}", c.dim));
  if (!std::isfinite(c.tau)) bad("tau must be finite");
  if (!(c.lr > 0.0) || !std::isfinite(c.lr)) bad(fmt::format("lr must be positive, got {}", c.lr));
  if (!(c.noise >= 0.0 && c.noise <= 1.0)) bad("noise must lie in [0,1]");
  if (!(c.signal >= 0.0 && c.signal <= 1.0)) bad("signal must lie in [0,1]");
  if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) bad("split ratio must lie in (0,1)");
  if (!c.corpus && c.docs < 1) bad("docs must be >= 1");
  if (!(c.tau_min < c.tau_max)) bad("tau-min must be below tau-max");
  if (c.steps < 2) bad("steps must be >= 2");
  if (c.corpus && !std::filesystem::exists(*c.corpus)) {
    bad("corpus not found: " + c.corpus->string());
  }
  if (c.embeddings && !std::filesystem::is_directory(*c.embeddings)) {
    bad("embeddings directory not found: " + c.embeddings->string());
  }
}

std::string training_digest(const Corpus &train, std::size_t dim, std::uint64_t seed,
                            std::size_t epochs, double lr) {
  const std::string key =
      fmt::format("train={};dim={};seed={};epochs={};lr={:.17g}",
                  internal::hex64(corpus_hash(train)), dim, seed, epochs, lr);
  return internal::hex64(internal::fnv1a(key));
}

std::string run_digest(const Corpus &test, std::size_t dim, std::uint64_t seed,
                       const LinearHead &head, const PatternRegistry &registry) {
  const std::string key = fmt::format(
      "test={};dim={};seed={};head={};patterns={}", internal::hex64(corpus_hash(test)),
      dim, seed, internal::hex64(internal::fnv1a(format_head(head))),
      internal::hex64(internal::fnv1a(format_patterns(registry))));
  return internal::hex64(internal::fnv1a(key));
}

void embed_corpus(const Corpus &corpus, const std::filesystem::path &dir,
                  std::size_t dim, std::uint64_t seed, double signal, std::size_t workers) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "embedding", "cannot create " + dir.string());
  internal::parallel_for(corpus.size(), workers, [&](std::size_t i) {
    write_embeddings(pseudo_embed(corpus[i], dim, seed, signal),
                     embedding_path(dir, corpus[i].id));
  });
}

EmbeddingSet load_embedding_set(const Corpus &corpus, const std::filesystem::path &dir,
                                std::size_t dim, std::size_t workers) {
  std::vector<EmbeddingMatrix> loaded(corpus.size());
  internal::parallel_for(corpus.size(), workers, [&](std::size_t i) {
    loaded[i] = load_document_embeddings(dir, corpus[i], dim);
  });
  EmbeddingSet set;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    set.emplace(corpus[i].id, std::move(loaded[i]));
  }
  return set;
}

std::vector<DocumentPrediction> extract(const Corpus &corpus, const EmbeddingSet &embeddings,
                                        const LinearHead &head,
                                        const PatternRegistry &registry, double tau,
                                        std::size_t workers) {
  if (registry.dim != head.dim) {
    fail(ErrorCode::kDimensionMismatch, kModule,
         fmt::format("registry dim {} vs head dim {}", registry.dim, head.dim));
  }
  std::vector<DocumentPrediction> out(corpus.size());
  internal::parallel_for(corpus.size(), workers, [&](std::size_t i) {
    const Document &doc = corpus[i];
    const auto it = embeddings.find(doc.id);
    if (it == embeddings.end()) {
      fail(ErrorCode::kInvalidArgument, kModule, "no embeddings for \"" + doc.id + "\"");
    }
    DocumentPrediction &p = out[i];
    p.id = doc.id;
    p.baseline = decode_spans(predict_tokens(it->second, head));
    FilterResult filtered = filter_entities(p.baseline, it->second, registry, tau);
    p.hybrid = std::move(filtered.retained);
    p.audit = std::move(filtered.audit);
  });
  return out;
}

std::string format_predictions(const PredictionFile &predictions) {
  std::string out;
  for (const auto &doc : predictions.documents) {
    json j;
    j["id"] = doc.id;
    j["digest"] = predictions.digest;
    j["tau"] = predictions.tau;
    j["baseline"] = spans_json(doc.baseline);
    j["hybrid"] = spans_json(doc.hybrid);
    json audit = json::array();
    for (const auto &a : doc.audit) {
      audit.push_back({{"start_token", a.span.start_token},
                       {"end_token", a.span.end_token},
                       {"label", label_name(a.span.label)},
                       {"similarity", round6(a.similarity)},
                       {"decision", a.retained ? "retain" : "discard"},
                       {"reason", reason_name(a.reason)}});
    }
    j["audit"] = std::move(audit);
    out += j.dump();
    out += '\n';
  }
  return out;
}

PredictionFile parse_predictions(std::string_view text) {
  PredictionFile file;
  bool first = true;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      DocumentPrediction doc;
      doc.id = j.at("id").get<std::string>();
      const auto digest = j.at("digest").get<std::string>();
      const double tau = j.at("tau").get<double>();
      if (first) {
        file.digest = digest;
        file.tau = tau;
        first = false;
      } else if (digest != file.digest || tau != file.tau) {
        fail(ErrorCode::kDigestMismatch, kModule,
             fmt::format("line {}: record from a different run", line_no));
      }
      for (const auto &s : j.at("baseline")) doc.baseline.push_back(span_from_json(s));
      for (const auto &s : j.at("hybrid")) doc.hybrid.push_back(span_from_json(s));
      for (const auto &a : j.at("audit")) {
        ScoredEntity scored;
        scored.span = span_from_json(a);
        scored.similarity = a.at("similarity").get<double>();
        scored.retained = a.at("decision").get<std::string>() == "retain";
        const auto reason = a.at("reason").get<std::string>();
        if (reason == reason_name(FilterReason::kZeroNormEntity)) {
          scored.reason = FilterReason::kZeroNormEntity;
        } else {
          scored.reason = scored.retained ? FilterReason::kAtOrAboveThreshold
                                          : FilterReason::kBelowThreshold;
        }
        doc.audit.push_back(std::move(scored));
      }
      file.documents.push_back(std::move(doc));
    } catch (const json::exception &e) {
      fail(ErrorCode::kFormat, kModule,
           fmt::format("line {}: malformed prediction record: {}", line_no, e.what()));
    }
  }
  return file;
}

void save_predictions(const PredictionFile &predictions, const std::filesystem::path &path) {
  internal::write_file_atomic(path, format_predictions(predictions), kModule);
}

PredictionFile load_predictions(const std::filesystem::path &path) {
  return parse_predictions(internal::read_file(path, kModule));
}

Evaluation evaluate(const Corpus &gold, const PredictionFile &predictions) {
  std::map<std::string, const DocumentPrediction *> by_id;
  for (const auto &doc : predictions.documents) by_id.emplace(doc.id, &doc);

  MatchCounts baseline, hybrid;
  for (const Document &doc : gold) {
    const auto it = by_id.find(doc.id);
    if (it == by_id.end()) {
      fail(ErrorCode::kInvalidArgument, "eval",
           "no predictions for document \"" + doc.id + "\"");
    }
    const DocumentPrediction &p = *it->second;
    const std::set<EntitySpan> base_set(p.baseline.begin(), p.baseline.end());
    for (const auto &span : p.hybrid) {
      if (!base_set.contains(span)) {
        fail(ErrorCode::kInternal, "eval",
             "document \"" + doc.id + "\": hybrid span absent from baseline");
      }
    }
    const MatchCounts b = match_spans(p.baseline, doc.gold_entities);
    const MatchCounts h = match_spans(p.hybrid, doc.gold_entities);
    baseline += b;
    hybrid += h;
  }
  const Counts bm = baseline.micro(), hm = hybrid.micro();
  if (hm.tp > bm.tp || hm.fp > bm.fp) {
    fail(ErrorCode::kInternal, "eval",
         "filtered predictions gained true or false positives over the baseline");
  }
  return {compute_metrics(baseline, "baseline", std::nullopt, predictions.digest),
          compute_metrics(hybrid, "hybrid", predictions.tau, predictions.digest)};
}

const SweepRow &SweepTable::best_f1() const {
  if (rows.empty()) fail(ErrorCode::kInvalidArgument, kModule, "empty sweep");
  const SweepRow *best = &rows.front();
  for (const auto &row : rows) {
    if (row.metrics.f1 > best->metrics.f1) best = &row;
  }
  return *best;
}

std::vector<double> tau_grid(double tau_min, double tau_max, std::size_t steps) {
  if (!(tau_min < tau_max) || !std::isfinite(tau_min) || !std::isfinite(tau_max)) {
    fail(ErrorCode::kInvalidArgument, kModule, "sweep needs finite tau-min < tau-max");
  }
  if (steps < 2) fail(ErrorCode::kInvalidArgument, kModule, "sweep needs steps >= 2");
  std::vector<double> grid(steps);
  const double step = (tau_max - tau_min) / static_cast<double>(steps - 1);
  for (std::size_t k = 0; k < steps; ++k) grid[k] = tau_min + step * static_cast<double>(k);
  grid.back() = tau_max;
  return grid;
}

SweepTable sweep_tau(const Corpus &test, const EmbeddingSet &embeddings,
                     const LinearHead &head, const PatternRegistry &registry,
                     const std::string &digest, double tau_min, double tau_max,
                     std::size_t steps, std::size_t workers) {
  const std::vector<double> grid = tau_grid(tau_min, tau_max, steps);
  SweepTable table;
  table.digest = digest;
  for (double tau : grid) {
    PredictionFile file{digest, tau, extract(test, embeddings, head, registry, tau, workers)};
    const Evaluation ev = evaluate(test, file);
    SweepRow row;
    row.tau = tau;
    row.metrics = ev.hybrid.micro;
    row.counts = ev.hybrid.counts.micro();
    for (const auto &doc : file.documents) row.retained += doc.hybrid.size();
    if (!table.rows.empty() && row.retained > table.rows.back().retained) {
      fail(ErrorCode::kInternal, kModule, "retained count increased with tau");
    }
    table.rows.push_back(row);
  }
  return table;
}

std::string format_sweep(const SweepTable &table) {
  std::string out = "# digest " + table.digest + "\n";
  out += "tau\tprecision\trecall\tf1\ttp\tfp\tfn\tretained\n";
  for (const auto &r : table.rows) {
    out += fmt::format("{:.4f}\t{:.4f}\t{:.4f}\t{:.4f}\t{}\t{}\t{}\t{}\n", r.tau,
                       r.metrics.precision, r.metrics.recall, r.metrics.f1,
                       r.counts.tp, r.counts.fp, r.counts.fn, r.retained);
  }
  return out;
}

RunConfig demo_config() { return RunConfig{}; }

RunResult run_pipeline(const RunConfig &config) {
  validate_config(config);
  RunResult result;
  ArtifactGuard guard(result.artifacts);
  const auto &out = config.out;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) fail(ErrorCode::kIo, kModule, "cannot create " + out.string());

  auto stage = [](std::string_view name) { internal::log(1, fmt::format("stage: {}", name)); };

  stage("corpus");
  Corpus corpus = config.corpus ? load_corpus(*config.corpus)
                                : synth_corpus(config.docs, config.noise, config.seed);
  guard.add(out / "corpus.jsonl");
  write_corpus(corpus, out / "corpus.jsonl");

  stage("split");
  const CorpusSplit split = split_corpus(corpus, config.split_ratio, config.seed);
  guard.add(out / "train.jsonl");
  write_corpus(split.train, out / "train.jsonl");
  guard.add(out / "test.jsonl");
  write_corpus(split.test, out / "test.jsonl");

  stage("embed");
  std::filesystem::path emb_dir;
  if (config.embeddings) {
    emb_dir = *config.embeddings;
  } else {
    emb_dir = out / "embeddings";
    guard.add(emb_dir);
    embed_corpus(corpus, emb_dir, config.dim, config.seed, config.signal, config.workers);
  }
  const EmbeddingSet train_emb =
      load_embedding_set(split.train, emb_dir, config.dim, config.workers);
  const EmbeddingSet test_emb =
      load_embedding_set(split.test, emb_dir, config.dim, config.workers);

  stage("train");
  const std::string train_digest = training_digest(split.train, config.dim, config.seed,
                                                   config.epochs, config.lr);
  const LinearHead head = train_head(split.train, train_emb,
                                     {config.epochs, config.lr, config.seed, nullptr});
  guard.add(out / "head.txt");
  save_head(head, out / "head.txt", train_digest);
  const PatternRegistry registry = build_patterns(split.train, train_emb);
  guard.add(out / "patterns.json");
  save_patterns(registry, out / "patterns.json", train_digest);

  stage("extract");
  result.digest = run_digest(split.test, config.dim, config.seed, head, registry);
  PredictionFile predictions{result.digest, config.tau,
                             extract(split.test, test_emb, head, registry, config.tau,
                                     config.workers)};
  guard.add(out / "predictions.jsonl");
  save_predictions(predictions, out / "predictions.jsonl");

  stage("eval");
  result.evaluation = evaluate(split.test, predictions);
  guard.add(out / "report.baseline.json");
  save_report(result.evaluation.baseline, out / "report.baseline.json");
  guard.add(out / "report.hybrid.json");
  save_report(result.evaluation.hybrid, out / "report.hybrid.json");
  result.comparison = compare_reports(result.evaluation.baseline, result.evaluation.hybrid);
  guard.add(out / "comparison.txt");
  internal::write_file_atomic(out / "comparison.txt", render_table(result.comparison), kModule);

  stage("sweep");
  result.sweep = sweep_tau(split.test, test_emb, head, registry, result.digest,
                           config.tau_min, config.tau_max, config.steps, config.workers);
  guard.add(out / "sweep.tsv");
  internal::write_file_atomic(out / "sweep.tsv", format_sweep(result.sweep), kModule);

  guard.commit();
  return result;
}

}  // namespace ler
