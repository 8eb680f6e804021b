#include "ler/classifier.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/core.h>

#include "ler/error.h"
#include "util.h"

namespace ler {
namespace {

using internal::fail;
constexpr std::string_view kModule = "classifier";

}  // namespace

std::string_view class_name(std::size_t class_index) {
  if (class_index < kNumEntityLabels) {
    return label_name(kAllEntityLabels[class_index]);
  }
  return "OUTSIDE";
}

LinearHead LinearHead::zeros(std::size_t dim) {
  LinearHead head;
  head.dim = dim;
  head.weights.assign(kNumClasses * dim, 0.0);
  head.bias.assign(kNumClasses, 0.0);
  return head;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  for (double z : logits) {
    if (!std::isfinite(z)) {
      fail(ErrorCode::kInvalidArgument, kModule, "non-finite logit");
    }
  }
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - max);
    sum += p[i];
  }
  for (double &x : p) x /= sum;
  return p;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<TokenPrediction> predict_tokens(const EmbeddingMatrix &m,
                                            const LinearHead &head) {
  if (m.dim() != head.dim) {
    fail(ErrorCode::kDimensionMismatch, kModule,
         fmt::format("document \"{}\": embedding dim {} vs head dim {}",
                     m.doc_id(), m.dim(), head.dim));
  }
  std::vector<TokenPrediction> out(m.n_tokens());
  std::array<double, kNumClasses> logits{};
  for (std::size_t t = 0; t < m.n_tokens(); ++t) {
    const auto row = m.row(t);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      double z = head.bias[c];
      for (std::size_t j = 0; j < head.dim; ++j) z += head.weight(c, j) * row[j];
      logits[c] = z;
    }
    const auto p = softmax(logits);
    out[t].token_index = t;
    std::copy(p.begin(), p.end(), out[t].probabilities.begin());
    // Argmax on the probabilities, not the logits: the exp can merge logits
    // that differ by less than an ulp and the tie rule applies to P.
    out[t].label = argmax(out[t].probabilities);
  }
  return out;
}

TokenSamples collect_samples(const Corpus &docs,
                             const std::map<std::string, EmbeddingMatrix> &embeddings) {
  TokenSamples samples;
  for (const Document &doc : docs) {
    const auto it = embeddings.find(doc.id);
    if (it == embeddings.end()) {
      fail(ErrorCode::kInvalidArgument, kModule,
           "no embeddings for document \"" + doc.id + "\"");
    }
    const EmbeddingMatrix &m = it->second;
    if (samples.dim == 0) samples.dim = m.dim();
    if (m.dim() != samples.dim) {
      fail(ErrorCode::kDimensionMismatch, kModule,
           fmt::format("document \"{}\": dim {} vs {}", doc.id, m.dim(), samples.dim));
    }
    if (m.n_tokens() != doc.token_count()) {
      fail(ErrorCode::kDimensionMismatch, kModule,
           fmt::format("document \"{}\": {} rows vs {} tokens", doc.id,
                       m.n_tokens(), doc.token_count()));
    }
    const auto labels = token_labels(doc);
    for (std::size_t t = 0; t < doc.token_count(); ++t) {
      const auto row = m.row(t);
      samples.features.insert(samples.features.end(), row.begin(), row.end());
      samples.labels.push_back(labels[t] ? label_index(*labels[t]) : kOutsideClass);
    }
  }
  return samples;
}

LossGradient cross_entropy_gradient(std::span<const double> weights,
                                    std::span<const double> bias,
                                    std::size_t classes,
                                    const TokenSamples &samples) {
  const std::size_t dim = samples.dim;
  if (bias.size() != classes || weights.size() != classes * dim) {
    fail(ErrorCode::kDimensionMismatch, kModule,
         fmt::format("parameter shape {}x{} does not fit {} classes, dim {}",
                     weights.size(), bias.size(), classes, dim));
  }
  LossGradient g;
  g.d_weights.assign(weights.size(), 0.0);
  g.d_bias.assign(classes, 0.0);
  const std::size_t n = samples.size();
  if (n == 0) return g;

  std::vector<double> logits(classes);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double *h = samples.features.data() + i * dim;
    for (std::size_t c = 0; c < classes; ++c) {
      double z = bias[c];
      for (std::size_t j = 0; j < dim; ++j) z += weights[c * dim + j] * h[j];
      logits[c] = z;
    }
    const double max = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - max);
    const double log_norm = max + std::log(sum);
    const std::size_t y = samples.labels[i];
    g.loss += (log_norm - logits[y]) * scale;
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(logits[c] - log_norm);
      const double delta = (p - (c == y ? 1.0 : 0.0)) * scale;
      g.d_bias[c] += delta;
      for (std::size_t j = 0; j < dim; ++j) g.d_weights[c * dim + j] += delta * h[j];
    }
  }
  return g;
}

LinearHead train_head(const TokenSamples &samples, const TrainOptions &options) {
  if (!(options.lr > 0.0) || !std::isfinite(options.lr)) {
    fail(ErrorCode::kInvalidArgument, kModule,
         fmt::format("learning rate must be positive, got {}", options.lr));
  }
  if (samples.dim == 0) {
    fail(ErrorCode::kInvalidArgument, kModule, "no training samples");
  }
  LinearHead head = LinearHead::zeros(samples.dim);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const LossGradient g =
        cross_entropy_gradient(head.weights, head.bias, kNumClasses, samples);
    for (std::size_t k = 0; k < head.weights.size(); ++k) {
      head.weights[k] -= options.lr * g.d_weights[k];
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) head.bias[c] -= options.lr * g.d_bias[c];
    if (options.loss_history != nullptr) {
      options.loss_history->push_back(
          cross_entropy_gradient(head.weights, head.bias, kNumClasses, samples).loss);
    }
    if (internal::log_level() >= 2 && (epoch + 1) % 50 == 0) {
      internal::log(2, fmt::format("epoch {} loss {:.6f}", epoch + 1, g.loss));
    }
  }
  return head;
}

LinearHead train_head(const Corpus &train_docs,
                      const std::map<std::string, EmbeddingMatrix> &embeddings,
                      const TrainOptions &options) {
  return train_head(collect_samples(train_docs, embeddings), options);
}

std::vector<EntitySpan> decode_labels(std::span<const std::size_t> classes) {
  std::vector<EntitySpan> spans;
  std::size_t t = 0;
  while (t < classes.size()) {
    const std::size_t c = classes[t];
    std::size_t end = t + 1;
    while (end < classes.size() && classes[end] == c) ++end;
    if (c < kNumEntityLabels) spans.push_back({t, end, kAllEntityLabels[c]});
    t = end;
  }
  return spans;
}

std::vector<EntitySpan> decode_spans(std::span<const TokenPrediction> predictions) {
  std::vector<std::size_t> classes;
  classes.reserve(predictions.size());
  for (const auto &p : predictions) classes.push_back(p.label);
  return decode_labels(classes);
}

std::vector<std::size_t> encode_labels(std::span<const EntitySpan> spans,
                                       std::size_t n_tokens) {
  std::vector<std::size_t> classes(n_tokens, kOutsideClass);
  for (const auto &span : spans) {
    if (span.end_token > n_tokens || span.start_token >= span.end_token) {
      fail(ErrorCode::kInvalidArgument, kModule, "span out of range");
    }
    for (std::size_t t = span.start_token; t < span.end_token; ++t) {
      classes[t] = label_index(span.label);
    }
  }
  return classes;
}

std::string format_head(const LinearHead &head, const std::string &digest) {
  std::string out = "ler-head 1\n";
  out += fmt::format("dim {}\n", head.dim);
  out += "label_order";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out += ' ';
    out += class_name(c);
  }
  out += '\n';
  if (!digest.empty()) out += "digest " + digest + '\n';
  out += 'W';
  for (double w : head.weights) out += fmt::format(" {:.17g}", w);
  out += "\nb";
  for (double b : head.bias) out += fmt::format(" {:.17g}", b);
  out += '\n';
  return out;
}

LinearHead parse_head(std::string_view text, std::string *digest) {
  auto bad = [](const std::string &what) -> void {
    fail(ErrorCode::kFormat, kModule, "head file: " + what);
  };
  std::istringstream in{std::string(text)};
  std::string line;
  LinearHead head;
  bool have_dim = false, have_w = false, have_b = false, have_order = false;
  if (!std::getline(in, line) || line != "ler-head 1") bad("missing 'ler-head 1' header");

  auto read_values = [&](std::istringstream &fields, std::vector<double> &dst) {
    std::string tok;
    while (fields >> tok) {
      char *end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size() || !std::isfinite(v)) {
        bad("bad number '" + tok + "'");
      }
      dst.push_back(v);
    }
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "dim") {
      if (!(fields >> head.dim) || head.dim == 0) bad("bad dim");
      have_dim = true;
    } else if (key == "label_order") {
      std::vector<std::string> names;
      std::string name;
      while (fields >> name) names.push_back(name);
      if (names.size() != kNumClasses) bad("label_order must list 5 classes");
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (names[c] != class_name(c)) {
          bad(fmt::format("unsupported label order at position {}: {}", c, names[c]));
        }
      }
      have_order = true;
    } else if (key == "digest") {
      std::string value;
      fields >> value;
      if (digest != nullptr) *digest = value;
    } else if (key == "W") {
      read_values(fields, head.weights);
      have_w = true;
    } else if (key == "b") {
      read_values(fields, head.bias);
      have_b = true;
    } else {
      bad("unknown field '" + key + "'");
    }
  }
  if (!have_dim || !have_w || !have_b || !have_order) {
    bad("requires dim, label_order, W and b");
  }
  if (head.weights.size() != kNumClasses * head.dim) {
    bad(fmt::format("W has {} values, expected {}", head.weights.size(),
                    kNumClasses * head.dim));
  }
  if (head.bias.size() != kNumClasses) {
    bad(fmt::format("b has {} values, expected {}", head.bias.size(), kNumClasses));
  }
  return head;
}

void save_head(const LinearHead &head, const std::filesystem::path &path,
               const std::string &digest) {
  for (double w : head.weights) {
    if (!std::isfinite(w)) fail(ErrorCode::kInvalidArgument, kModule, "non-finite weight");
  }
  internal::write_file_atomic(path, format_head(head, digest), kModule);
}

LinearHead load_head(const std::filesystem::path &path, std::string *digest) {
  return parse_head(internal::read_file(path, kModule), digest);
}

}  // namespace ler
