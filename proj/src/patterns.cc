#include "ler/patterns.h"

#include <cmath>

#include <fmt/core.h>
#include <json.hpp>

#include "ler/error.h"
#include "util.h"

namespace ler {
namespace {

using internal::fail;
using json = nlohmann::ordered_json;
constexpr std::string_view kModule = "patterns";

// Neumaier summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace

void validate_registry(const PatternRegistry &registry) {
  if (registry.dim == 0) fail(ErrorCode::kFormat, kModule, "dim must be positive");
  for (EntityLabel label : kAllEntityLabels) {
    const auto &v = registry.pattern(label);
    const std::string name(label_name(label));
    if (v.empty()) fail(ErrorCode::kFormat, kModule, "missing pattern for " + name);
    if (v.size() != registry.dim) {
      fail(ErrorCode::kDimensionMismatch, kModule,
           fmt::format("pattern {} has {} components, expected {}", name,
                       v.size(), registry.dim));
    }
    double sq = 0.0;
    for (double x : v) {
      if (!std::isfinite(x)) {
        fail(ErrorCode::kFormat, kModule, "non-finite component in pattern " + name);
      }
      sq += x * x;
    }
    if (!(sq > 0.0)) fail(ErrorCode::kFormat, kModule, "zero-norm pattern for " + name);
  }
}

PatternRegistry build_patterns(const Corpus &train_docs,
                               const std::map<std::string, EmbeddingMatrix> &embeddings) {
  std::size_t dim = 0;
  std::array<std::vector<CompensatedSum>, kNumEntityLabels> sums;
  std::array<std::size_t, kNumEntityLabels> counts{};

  for (const Document &doc : train_docs) {
    if (doc.gold_entities.empty()) continue;
    const auto it = embeddings.find(doc.id);
    if (it == embeddings.end()) {
      fail(ErrorCode::kInvalidArgument, kModule,
           "no embeddings for document \"" + doc.id + "\"");
    }
    const EmbeddingMatrix &m = it->second;
    if (dim == 0) {
      dim = m.dim();
      for (auto &s : sums) s.resize(dim);
    } else if (m.dim() != dim) {
      fail(ErrorCode::kDimensionMismatch, kModule,
           fmt::format("document \"{}\": dim {} vs {}", doc.id, m.dim(), dim));
    }
    for (const EntitySpan &span : doc.gold_entities) {
      if (span.end_token > m.n_tokens()) {
        fail(ErrorCode::kDimensionMismatch, kModule,
             fmt::format("document \"{}\": span exceeds {} embedding rows",
                         doc.id, m.n_tokens()));
      }
      std::vector<double> centroid(dim, 0.0);
      for (std::size_t t = span.start_token; t < span.end_token; ++t) {
        const auto row = m.row(t);
        for (std::size_t j = 0; j < dim; ++j) centroid[j] += row[j];
      }
      const std::size_t k = label_index(span.label);
      for (std::size_t j = 0; j < dim; ++j) {
        sums[k][j].add(centroid[j] / static_cast<double>(span.length()));
      }
      ++counts[k];
    }
  }

  PatternRegistry registry;
  registry.dim = dim;
  for (EntityLabel label : kAllEntityLabels) {
    const std::size_t k = label_index(label);
    if (counts[k] == 0) {
      fail(ErrorCode::kInvalidArgument, kModule,
           fmt::format("no gold spans labeled {} in the training documents",
                       label_name(label)));
    }
    auto &v = registry.patterns[k];
    v.resize(dim);
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      v[j] = sums[k][j].value() / static_cast<double>(counts[k]);
      sq += v[j] * v[j];
    }
    if (!(sq > 0.0)) {
      fail(ErrorCode::kInvalidArgument, kModule,
           fmt::format("zero-norm centroid for {}", label_name(label)));
    }
  }
  return registry;
}

std::string format_patterns(const PatternRegistry &registry, const std::string &digest) {
  validate_registry(registry);
  json j;
  j["dim"] = registry.dim;
  json patterns = json::object();
  for (EntityLabel label : kAllEntityLabels) {
    patterns[std::string(label_name(label))] = registry.pattern(label);
  }
  j["patterns"] = std::move(patterns);
  if (!digest.empty()) j["digest"] = digest;
  return j.dump(2) + "\n";
}

PatternRegistry parse_patterns(std::string_view text, std::size_t expected_dim,
                               std::string *digest) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    fail(ErrorCode::kFormat, kModule, std::string("malformed registry: ") + e.what());
  }
  PatternRegistry registry;
  try {
    registry.dim = j.at("dim").get<std::size_t>();
    if (expected_dim != 0 && registry.dim != expected_dim) {
      fail(ErrorCode::kDimensionMismatch, kModule,
           fmt::format("registry dim {} vs pipeline dim {}", registry.dim,
                       expected_dim));
    }
    const json &patterns = j.at("patterns");
    for (const auto &[key, value] : patterns.items()) {
      if (!parse_label(key)) {
        fail(ErrorCode::kFormat, kModule, "unknown label \"" + key + "\" in registry");
      }
    }
    for (EntityLabel label : kAllEntityLabels) {
      const std::string name(label_name(label));
      if (!patterns.contains(name)) {
        fail(ErrorCode::kFormat, kModule, "registry is missing an entry for " + name);
      }
      registry.patterns[label_index(label)] = patterns.at(name).get<std::vector<double>>();
    }
    if (digest != nullptr && j.contains("digest")) {
      *digest = j.at("digest").get<std::string>();
    }
  } catch (const json::exception &e) {
    fail(ErrorCode::kFormat, kModule, std::string("malformed registry: ") + e.what());
  }
  validate_registry(registry);
  return registry;
}

void save_patterns(const PatternRegistry &registry, const std::filesystem::path &path,
                   const std::string &digest) {
  internal::write_file_atomic(path, format_patterns(registry, digest), kModule);
}

PatternRegistry load_patterns(const std::filesystem::path &path,
                              std::size_t expected_dim, std::string *digest) {
  return parse_patterns(internal::read_file(path, kModule), expected_dim, digest);
}

}  // namespace ler
