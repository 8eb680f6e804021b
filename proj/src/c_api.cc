#include "ler/ler.h"

#include <exception>
#include <new>
#include <string>

#include <fmt/core.h>

#include "ler/error.h"
#include "ler/pipeline.h"
#include "util.h"

struct ler_corpus {
  ler::Corpus corpus;
};
struct ler_head {
  ler::LinearHead head;
  std::string digest;
};
struct ler_patterns {
  ler::PatternRegistry registry;
  std::string digest;
};
struct ler_report {
  ler::MetricsReport report;
};
struct ler_text {
  std::string text;
};

namespace {

thread_local std::string g_error_message;
thread_local std::string g_error_module;

void set_error(std::string module, std::string message) {
  g_error_module = std::move(module);
  g_error_message = std::move(message);
}

ler_status to_status(ler::ErrorCode code) {
  return static_cast<ler_status>(static_cast<int>(code));
}

// Runs body and converts any exception into a status code.
template <typename Body>
ler_status guarded(Body &&body) {
  g_error_message.clear();
  g_error_module.clear();
  try {
    body();
    return LER_OK;
  } catch (const ler::Error &e) {
    set_error(e.module(), e.what());
    return to_status(e.code());
  } catch (const std::bad_alloc &) {
    set_error("core", "out of memory");
    return LER_ERROR_INTERNAL;
  } catch (const std::exception &e) {
    set_error("core", e.what());
    return LER_ERROR_INTERNAL;
  } catch (...) {
    set_error("core", "unknown exception");
    return LER_ERROR_INTERNAL;
  }
}

void require(bool condition, const char *what) {
  if (!condition) {
    throw ler::Error(ler::ErrorCode::kInvalidArgument, "capi", what);
  }
}

std::string patterns_digest(const ler::Corpus &train, std::size_t dim) {
  return ler::internal::hex64(ler::internal::fnv1a(fmt::format(
      "train={};dim={}", ler::internal::hex64(ler::corpus_hash(train)), dim)));
}

}  // namespace

extern "C" {

const char *ler_version(void) { return "1.0.0"; }

const char *ler_status_name(ler_status status) {
  if (status == LER_OK) return "ok";
  return ler::error_code_name(static_cast<ler::ErrorCode>(status));
}

const char *ler_last_error_message(void) { return g_error_message.c_str(); }
const char *ler_last_error_module(void) { return g_error_module.c_str(); }

const char *ler_text_data(const ler_text *text) {
  return text != nullptr ? text->text.c_str() : "";
}
void ler_text_free(ler_text *text) { delete text; }

ler_status ler_corpus_load(const char *path, ler_corpus **out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new ler_corpus{ler::load_corpus(path)};
  });
}

ler_status ler_corpus_synth(size_t n_docs, double noise, uint64_t seed, ler_corpus **out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new ler_corpus{ler::synth_corpus(n_docs, noise, seed)};
  });
}

ler_status ler_corpus_save(const ler_corpus *corpus, const char *path) {
  return guarded([&] {
    require(corpus != nullptr && path != nullptr, "null argument");
    ler::write_corpus(corpus->corpus, path);
  });
}

size_t ler_corpus_size(const ler_corpus *corpus) {
  return corpus != nullptr ? corpus->corpus.size() : 0;
}

ler_status ler_corpus_split(const ler_corpus *corpus, double ratio, uint64_t seed,
                            ler_corpus **train, ler_corpus **test) {
  return guarded([&] {
    require(corpus != nullptr && train != nullptr && test != nullptr, "null argument");
    ler::CorpusSplit split = ler::split_corpus(corpus->corpus, ratio, seed);
    auto *tr = new ler_corpus{std::move(split.train)};
    *test = new ler_corpus{std::move(split.test)};
    *train = tr;
  });
}

void ler_corpus_free(ler_corpus *corpus) { delete corpus; }

ler_status ler_embed(const ler_corpus *corpus, const char *dir, size_t dim, uint64_t seed,
                     double signal, size_t workers) {
  return guarded([&] {
    require(corpus != nullptr && dir != nullptr, "null argument");
    ler::embed_corpus(corpus->corpus, dir, dim, seed, signal, workers);
  });
}

ler_status ler_head_train(const ler_corpus *train, const char *embeddings_dir, size_t dim,
                          size_t epochs, double lr, uint64_t seed, ler_head **out) {
  return guarded([&] {
    require(train != nullptr && embeddings_dir != nullptr && out != nullptr, "null argument");
    const auto emb = ler::load_embedding_set(train->corpus, embeddings_dir, dim);
    auto head = ler::train_head(train->corpus, emb, {epochs, lr, seed, nullptr});
    *out = new ler_head{std::move(head),
                        ler::training_digest(train->corpus, dim, seed, epochs, lr)};
  });
}

ler_status ler_head_save(const ler_head *head, const char *path) {
  return guarded([&] {
    require(head != nullptr && path != nullptr, "null argument");
    ler::save_head(head->head, path, head->digest);
  });
}

ler_status ler_head_load(const char *path, ler_head **out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    std::string digest;
    auto head = ler::load_head(path, &digest);
    *out = new ler_head{std::move(head), std::move(digest)};
  });
}

size_t ler_head_dim(const ler_head *head) { return head != nullptr ? head->head.dim : 0; }
void ler_head_free(ler_head *head) { delete head; }

ler_status ler_patterns_build(const ler_corpus *train, const char *embeddings_dir,
                              size_t dim, ler_patterns **out) {
  return guarded([&] {
    require(train != nullptr && embeddings_dir != nullptr && out != nullptr, "null argument");
    const auto emb = ler::load_embedding_set(train->corpus, embeddings_dir, dim);
    *out = new ler_patterns{ler::build_patterns(train->corpus, emb),
                            patterns_digest(train->corpus, dim)};
  });
}

ler_status ler_patterns_save(const ler_patterns *patterns, const char *path) {
  return guarded([&] {
    require(patterns != nullptr && path != nullptr, "null argument");
    ler::save_patterns(patterns->registry, path, patterns->digest);
  });
}

ler_status ler_patterns_load(const char *path, size_t expected_dim, ler_patterns **out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    std::string digest;
    auto registry = ler::load_patterns(path, expected_dim, &digest);
    *out = new ler_patterns{std::move(registry), std::move(digest)};
  });
}

void ler_patterns_free(ler_patterns *patterns) { delete patterns; }

ler_status ler_extract(const ler_corpus *test, const char *embeddings_dir,
                       const ler_head *head, const ler_patterns *patterns, uint64_t seed,
                       double tau, size_t workers, const char *out_path) {
  return guarded([&] {
    require(test != nullptr && embeddings_dir != nullptr && head != nullptr &&
                patterns != nullptr && out_path != nullptr,
            "null argument");
    const std::size_t dim = head->head.dim;
    const auto emb = ler::load_embedding_set(test->corpus, embeddings_dir, dim, workers);
    ler::PredictionFile file;
    file.digest = ler::run_digest(test->corpus, dim, seed, head->head, patterns->registry);
    file.tau = tau;
    file.documents = ler::extract(test->corpus, emb, head->head, patterns->registry, tau,
                                  workers);
    ler::save_predictions(file, out_path);
  });
}

ler_status ler_evaluate(const ler_corpus *test, const char *predictions_path,
                        const char *baseline_report_path, const char *hybrid_report_path) {
  return guarded([&] {
    require(test != nullptr && predictions_path != nullptr &&
                baseline_report_path != nullptr && hybrid_report_path != nullptr,
            "null argument");
    const auto ev = ler::evaluate(test->corpus, ler::load_predictions(predictions_path));
    ler::save_report(ev.baseline, baseline_report_path);
    ler::save_report(ev.hybrid, hybrid_report_path);
  });
}

ler_status ler_report_load(const char *path, ler_report **out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new ler_report{ler::load_report(path)};
  });
}

void ler_report_micro(const ler_report *report, double *precision, double *recall,
                      double *f1) {
  if (report == nullptr) return;
  if (precision != nullptr) *precision = report->report.micro.precision;
  if (recall != nullptr) *recall = report->report.micro.recall;
  if (f1 != nullptr) *f1 = report->report.micro.f1;
}

void ler_report_free(ler_report *report) { delete report; }

ler_status ler_compare(const ler_report *baseline, const ler_report *hybrid,
                       const char *out_path, ler_text **table) {
  return guarded([&] {
    require(baseline != nullptr && hybrid != nullptr, "null argument");
    std::string text =
        ler::render_table(ler::compare_reports(baseline->report, hybrid->report));
    if (out_path != nullptr) ler::internal::write_file_atomic(out_path, text, "eval");
    if (table != nullptr) *table = new ler_text{std::move(text)};
  });
}

ler_status ler_sweep(const ler_corpus *test, const char *embeddings_dir,
                     const ler_head *head, const ler_patterns *patterns, uint64_t seed,
                     double tau_min, double tau_max, size_t steps, size_t workers,
                     const char *out_path, ler_text **table) {
  return guarded([&] {
    require(test != nullptr && embeddings_dir != nullptr && head != nullptr &&
                patterns != nullptr,
            "null argument");
    const std::size_t dim = head->head.dim;
    const auto emb = ler::load_embedding_set(test->corpus, embeddings_dir, dim, workers);
    const std::string digest =
        ler::run_digest(test->corpus, dim, seed, head->head, patterns->registry);
    std::string text = ler::format_sweep(ler::sweep_tau(test->corpus, emb, head->head,
                                                        patterns->registry, digest, tau_min,
                                                        tau_max, steps, workers));
    if (out_path != nullptr) ler::internal::write_file_atomic(out_path, text, "pipeline");
    if (table != nullptr) *table = new ler_text{std::move(text)};
  });
}

void ler_run_config_init(ler_run_config *config) {
  if (config == nullptr) return;
  const ler::RunConfig d = ler::demo_config();
  config->docs = d.docs;
  config->noise = d.noise;
  config->signal = d.signal;
  config->dim = d.dim;
  config->seed = d.seed;
  config->tau = d.tau;
  config->epochs = d.epochs;
  config->lr = d.lr;
  config->split_ratio = d.split_ratio;
  config->workers = d.workers;
  config->corpus_path = nullptr;
  config->embeddings_dir = nullptr;
  config->out_dir = nullptr;
  config->tau_min = d.tau_min;
  config->tau_max = d.tau_max;
  config->steps = d.steps;
}

ler_status ler_run_pipeline(const ler_run_config *config, ler_text **summary) {
  return guarded([&] {
    require(config != nullptr && config->out_dir != nullptr, "config and out_dir required");
    ler::RunConfig rc;
    rc.docs = config->docs;
    rc.noise = config->noise;
    rc.signal = config->signal;
    rc.dim = config->dim;
    rc.seed = config->seed;
    rc.tau = config->tau;
    rc.epochs = config->epochs;
    rc.lr = config->lr;
    rc.split_ratio = config->split_ratio;
    rc.workers = config->workers;
    if (config->corpus_path != nullptr) rc.corpus = config->corpus_path;
    if (config->embeddings_dir != nullptr) rc.embeddings = config->embeddings_dir;
    rc.out = config->out_dir;
    rc.tau_min = config->tau_min;
    rc.tau_max = config->tau_max;
    rc.steps = config->steps;
    const ler::RunResult result = ler::run_pipeline(rc);
    if (summary != nullptr) {
      const ler::SweepRow &best = result.sweep.best_f1();
      std::string text = ler::render_table(result.comparison);
      text += fmt::format(
          "best sweep tau: {:.4f} (precision {:.4f}, recall {:.4f}, f1 {:.4f}, retained {})\n",
          best.tau, best.metrics.precision, best.metrics.recall, best.metrics.f1,
          best.retained);
      *summary = new ler_text{std::move(text)};
    }
  });
}

}  // extern "C"
