// Command-line driver. Links only the C interface in ler/ler.h.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ler/ler.h"

namespace {

struct CliError {
  ler_status status;
};

void check(ler_status status) {
  if (status != LER_OK) throw CliError{status};
}

template <typename T, void (*Free)(T *)>
struct Deleter {
  void operator()(T *p) const { Free(p); }
};
using CorpusPtr = std::unique_ptr<ler_corpus, Deleter<ler_corpus, ler_corpus_free>>;
using HeadPtr = std::unique_ptr<ler_head, Deleter<ler_head, ler_head_free>>;
using PatternsPtr = std::unique_ptr<ler_patterns, Deleter<ler_patterns, ler_patterns_free>>;
using ReportPtr = std::unique_ptr<ler_report, Deleter<ler_report, ler_report_free>>;
using TextPtr = std::unique_ptr<ler_text, Deleter<ler_text, ler_text_free>>;

CorpusPtr load_corpus(const std::string &path) {
  ler_corpus *c = nullptr;
  check(ler_corpus_load(path.c_str(), &c));
  return CorpusPtr(c);
}

HeadPtr load_head(const std::string &path) {
  ler_head *h = nullptr;
  check(ler_head_load(path.c_str(), &h));
  return HeadPtr(h);
}

PatternsPtr load_patterns(const std::string &path, size_t dim) {
  ler_patterns *p = nullptr;
  check(ler_patterns_load(path.c_str(), dim, &p));
  return PatternsPtr(p);
}

ReportPtr load_report(const std::string &path) {
  ler_report *r = nullptr;
  check(ler_report_load(path.c_str(), &r));
  return ReportPtr(r);
}

std::string one_line(std::string s) {
  for (char &c : s) {
    if (c == '\n' || c == '\r') c = ' ';
    if (c == '"') c = '\'';
  }
  return s;
}

// key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::map<std::string, std::string> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return values;
}

bool flag_present(const std::vector<std::string> &args, const std::string &flag) {
  for (const auto &a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Legal entity recognition with semantic filtering"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ler_version()));
  std::string config_path;
  app.add_option("--config", config_path, "key=value file; explicit flags override it");
  app.fallthrough();

  ler_run_config rc;
  ler_run_config_init(&rc);
  std::size_t docs = rc.docs, dim = rc.dim, epochs = rc.epochs, steps = rc.steps;
  std::size_t workers = rc.workers;
  double noise = rc.noise, signal = rc.signal, tau = rc.tau, lr = rc.lr;
  double ratio = rc.split_ratio, tau_min = rc.tau_min, tau_max = rc.tau_max;
  std::uint64_t seed = rc.seed;
  std::string corpus, embeddings, head, patterns, out, predictions, baseline, hybrid;

  auto add_seed = [&](CLI::App *s) { s->add_option("--seed", seed, "random seed")->capture_default_str(); };
  auto add_dim = [&](CLI::App *s) { s->add_option("--dim", dim, "embedding dimension")->capture_default_str(); };
  auto add_workers = [&](CLI::App *s) { s->add_option("--workers", workers, "document-parallel workers")->capture_default_str(); };

  auto *synth = app.add_subcommand("synth", "generate a synthetic annotated corpus");
  synth->add_option("--docs", docs, "number of documents")->capture_default_str();
  synth->add_option("--noise", noise, "fraction of documents with distractors")->capture_default_str();
  add_seed(synth);
  synth->add_option("--out", out, "corpus file to write")->required();

  auto *split = app.add_subcommand("split", "split a corpus into train and test documents");
  split->add_option("--corpus", corpus, "corpus file")->required();
  split->add_option("--ratio", ratio, "train fraction")->capture_default_str();
  add_seed(split);
  split->add_option("--out", out, "output prefix (<out>.train.jsonl, <out>.test.jsonl)")->required();

  auto *embed = app.add_subcommand("embed", "write pseudo-embeddings for every document");
  embed->add_option("--corpus", corpus, "corpus file")->required();
  add_dim(embed);
  add_seed(embed);
  embed->add_option("--signal", signal, "class signal strength in [0,1]")->capture_default_str();
  embed->add_option("--embeddings", embeddings, "output directory")->required();
  add_workers(embed);

  auto *train = app.add_subcommand("train", "train the head and build class patterns");
  train->add_option("--corpus", corpus, "training corpus file")->required();
  train->add_option("--embeddings", embeddings, "embedding directory")->required();
  add_dim(train);
  train->add_option("--epochs", epochs, "gradient descent epochs")->capture_default_str();
  train->add_option("--lr", lr, "learning rate")->capture_default_str();
  add_seed(train);
  train->add_option("--head", head, "head file to write")->required();
  train->add_option("--patterns", patterns, "pattern registry to write")->required();

  auto *extract = app.add_subcommand("extract", "predict baseline and filtered entities");
  extract->add_option("--corpus", corpus, "test corpus file")->required();
  extract->add_option("--embeddings", embeddings, "embedding directory")->required();
  extract->add_option("--head", head, "head file")->required();
  extract->add_option("--patterns", patterns, "pattern registry")->required();
  extract->add_option("--tau", tau, "similarity threshold")->required();
  add_seed(extract);
  add_workers(extract);
  extract->add_option("--out", out, "prediction file to write")->required();

  auto *eval = app.add_subcommand("eval", "score predictions against gold spans");
  eval->add_option("--corpus", corpus, "test corpus file")->required();
  eval->add_option("--predictions", predictions, "prediction file")->required();
  eval->add_option("--out", out, "report prefix (<out>.baseline.json, <out>.hybrid.json)")->required();

  auto *compare = app.add_subcommand("compare", "render the baseline vs hybrid table");
  compare->add_option("--baseline", baseline, "baseline report")->required();
  compare->add_option("--hybrid", hybrid, "hybrid report")->required();
  compare->add_option("--out", out, "optional file for the table");

  auto *sweep = app.add_subcommand("sweep", "evaluate a range of thresholds");
  sweep->add_option("--corpus", corpus, "test corpus file")->required();
  sweep->add_option("--embeddings", embeddings, "embedding directory")->required();
  sweep->add_option("--head", head, "head file")->required();
  sweep->add_option("--patterns", patterns, "pattern registry")->required();
  add_seed(sweep);
  sweep->add_option("--tau-min", tau_min, "lowest threshold")->capture_default_str();
  sweep->add_option("--tau-max", tau_max, "highest threshold")->capture_default_str();
  sweep->add_option("--steps", steps, "number of thresholds (>= 2)")->capture_default_str();
  add_workers(sweep);
  sweep->add_option("--out", out, "optional TSV output");

  auto *demo = app.add_subcommand("demo", "end-to-end run on a synthetic or supplied corpus");
  demo->add_option("--corpus", corpus, "corpus file (synthesized when omitted)");
  demo->add_option("--embeddings", embeddings, "pre-exported embeddings (pseudo when omitted)");
  demo->add_option("--docs", docs, "synthetic documents")->capture_default_str();
  demo->add_option("--noise", noise, "distractor document fraction")->capture_default_str();
  demo->add_option("--signal", signal, "pseudo-embedding signal")->capture_default_str();
  add_dim(demo);
  add_seed(demo);
  demo->add_option("--tau", tau, "similarity threshold")->capture_default_str();
  demo->add_option("--epochs", epochs, "gradient descent epochs")->capture_default_str();
  demo->add_option("--lr", lr, "learning rate")->capture_default_str();
  demo->add_option("--ratio", ratio, "train fraction")->capture_default_str();
  demo->add_option("--tau-min", tau_min, "sweep lower bound")->capture_default_str();
  demo->add_option("--tau-max", tau_max, "sweep upper bound")->capture_default_str();
  demo->add_option("--steps", steps, "sweep steps")->capture_default_str();
  add_workers(demo);
  demo->add_option("--out", out, "output directory")->default_str("ler-demo");

  // Config file values are spliced in as flags ahead of the command line
  // ones, only for flags the chosen subcommand accepts and the user did not
  // pass explicitly.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::string cfg;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) cfg = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) cfg = args[i].substr(9);
    }
    if (!cfg.empty()) {
      CLI::App *sub = nullptr;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
          ++i;
        } else if (!args[i].empty() && args[i][0] != '-') {
          sub = app.get_subcommand_no_throw(args[i]);
          break;
        }
      }
      if (sub != nullptr) {
        std::vector<std::string> extra;
        for (const auto &[key, value] : read_config(cfg)) {
          const std::string flag = "--" + key;
          if (sub->get_option_no_throw(flag) != nullptr && !flag_present(args, flag)) {
            extra.push_back(flag + "=" + value);
          }
        }
        args.insert(args.end(), extra.begin(), extra.end());
      }
    }
  } catch (const std::exception &e) {
    std::cerr << "ler: error module=cli status=invalid_argument message=\""
              << one_line(e.what()) << "\"\n";
    return 2;
  }

  std::vector<char *> cargv;
  std::string prog = argv[0];
  cargv.push_back(prog.data());
  for (auto &a : args) cargv.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "ler: error module=cli status=invalid_argument message=\""
              << one_line(e.what()) << "\"\n";
    return 2;
  }

  try {
    if (*synth) {
      ler_corpus *c = nullptr;
      check(ler_corpus_synth(docs, noise, seed, &c));
      CorpusPtr owned(c);
      check(ler_corpus_save(c, out.c_str()));
      std::cout << "wrote " << ler_corpus_size(c) << " documents to " << out << "\n";
    } else if (*split) {
      auto c = load_corpus(corpus);
      ler_corpus *tr = nullptr, *te = nullptr;
      check(ler_corpus_split(c.get(), ratio, seed, &tr, &te));
      CorpusPtr tr_owned(tr), te_owned(te);
      check(ler_corpus_save(tr, (out + ".train.jsonl").c_str()));
      check(ler_corpus_save(te, (out + ".test.jsonl").c_str()));
      std::cout << "train " << ler_corpus_size(tr) << ", test " << ler_corpus_size(te) << "\n";
    } else if (*embed) {
      auto c = load_corpus(corpus);
      check(ler_embed(c.get(), embeddings.c_str(), dim, seed, signal, workers));
      std::cout << "embedded " << ler_corpus_size(c.get()) << " documents into " << embeddings
                << "\n";
    } else if (*train) {
      auto c = load_corpus(corpus);
      ler_head *h = nullptr;
      check(ler_head_train(c.get(), embeddings.c_str(), dim, epochs, lr, seed, &h));
      HeadPtr h_owned(h);
      check(ler_head_save(h, head.c_str()));
      ler_patterns *p = nullptr;
      check(ler_patterns_build(c.get(), embeddings.c_str(), dim, &p));
      PatternsPtr p_owned(p);
      check(ler_patterns_save(p, patterns.c_str()));
      std::cout << "wrote " << head << " and " << patterns << "\n";
    } else if (*extract) {
      auto c = load_corpus(corpus);
      auto h = load_head(head);
      auto p = load_patterns(patterns, ler_head_dim(h.get()));
      check(ler_extract(c.get(), embeddings.c_str(), h.get(), p.get(), seed, tau, workers,
                        out.c_str()));
      std::cout << "wrote " << out << "\n";
    } else if (*eval) {
      auto c = load_corpus(corpus);
      const std::string b = out + ".baseline.json", hy = out + ".hybrid.json";
      check(ler_evaluate(c.get(), predictions.c_str(), b.c_str(), hy.c_str()));
      std::cout << "wrote " << b << " and " << hy << "\n";
    } else if (*compare) {
      auto b = load_report(baseline);
      auto hy = load_report(hybrid);
      ler_text *t = nullptr;
      check(ler_compare(b.get(), hy.get(), out.empty() ? nullptr : out.c_str(), &t));
      TextPtr owned(t);
      std::cout << ler_text_data(t);
    } else if (*sweep) {
      auto c = load_corpus(corpus);
      auto h = load_head(head);
      auto p = load_patterns(patterns, ler_head_dim(h.get()));
      ler_text *t = nullptr;
      check(ler_sweep(c.get(), embeddings.c_str(), h.get(), p.get(), seed, tau_min, tau_max,
                      steps, workers, out.empty() ? nullptr : out.c_str(), &t));
      TextPtr owned(t);
      std::cout << ler_text_data(t);
    } else if (*demo) {
      if (out.empty()) out = "ler-demo";
      rc.docs = docs;
      rc.noise = noise;
      rc.signal = signal;
      rc.dim = dim;
      rc.seed = seed;
      rc.tau = tau;
      rc.epochs = epochs;
      rc.lr = lr;
      rc.split_ratio = ratio;
      rc.workers = workers;
      rc.corpus_path = corpus.empty() ? nullptr : corpus.c_str();
      rc.embeddings_dir = embeddings.empty() ? nullptr : embeddings.c_str();
      rc.out_dir = out.c_str();
      rc.tau_min = tau_min;
      rc.tau_max = tau_max;
      rc.steps = steps;
      ler_text *t = nullptr;
      check(ler_run_pipeline(&rc, &t));
      TextPtr owned(t);
      std::cout << ler_text_data(t) << "artifacts in " << out << "\n";
    }
  } catch (const CliError &e) {
    std::cerr << "ler: error module=" << ler_last_error_module()
              << " status=" << ler_status_name(e.status) << " message=\""
              << one_line(ler_last_error_message()) << "\"\n";
    return 1;
  }
  return 0;
}
