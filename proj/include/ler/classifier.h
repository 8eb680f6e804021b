#ifndef LER_CLASSIFIER_H_
#define LER_CLASSIFIER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ler/corpus.h"
#include "ler/embedding.h"

namespace ler {

// Class order of the head: the four entity labels followed by OUTSIDE.
inline constexpr std::size_t kNumClasses = kNumEntityLabels + 1;
inline constexpr std::size_t kOutsideClass = kNumEntityLabels;
std::string_view class_name(std::size_t class_index);

// Linear layer W (kNumClasses x dim, row-major) and bias b.
struct LinearHead {
  std::size_t dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  static LinearHead zeros(std::size_t dim);
  double weight(std::size_t cls, std::size_t j) const { return weights[cls * dim + j]; }

  friend bool operator==(const LinearHead &, const LinearHead &) = default;
};

struct TokenPrediction {
  std::size_t token_index = 0;
  std::array<double, kNumClasses> probabilities{};
  std::size_t label = kOutsideClass;  // class index, ties -> lowest
};

// Max-shifted softmax. Throws Error(kInvalidArgument) on non-finite input.
std::vector<double> softmax(std::span<const double> logits);

// Index of the largest value; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

std::vector<TokenPrediction> predict_tokens(const EmbeddingMatrix &m,
                                            const LinearHead &head);

// Flattened training data: one feature row and class index per token.
struct TokenSamples {
  std::size_t dim = 0;
  std::vector<double> features;  // n x dim
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
};

// Gold class per token (IO rule); distractors count as OUTSIDE. The
// embeddings map is keyed by document id.
TokenSamples collect_samples(const Corpus &docs,
                             const std::map<std::string, EmbeddingMatrix> &embeddings);

// Mean token cross-entropy of softmax(W h + b) and its gradient, for any
// class count (weights is classes x dim).
struct LossGradient {
  double loss = 0.0;
  std::vector<double> d_weights;
  std::vector<double> d_bias;
};
LossGradient cross_entropy_gradient(std::span<const double> weights,
                                    std::span<const double> bias,
                                    std::size_t classes,
                                    const TokenSamples &samples);

struct TrainOptions {
  std::size_t epochs = 300;
  double lr = 0.5;
  std::uint64_t seed = 0;
  // Loss after each epoch is appended here when non-null.
  std::vector<double> *loss_history = nullptr;
};

// Full-batch gradient descent from W = 0, b = 0. The seed is accepted for
// interface stability; zero initialization makes training seed-independent.
LinearHead train_head(const TokenSamples &samples, const TrainOptions &options);
LinearHead train_head(const Corpus &train_docs,
                      const std::map<std::string, EmbeddingMatrix> &embeddings,
                      const TrainOptions &options);

// IO decoding: maximal runs of one non-OUTSIDE class become one span.
std::vector<EntitySpan> decode_spans(std::span<const TokenPrediction> predictions);
std::vector<EntitySpan> decode_labels(std::span<const std::size_t> classes);

// Inverse of decode_labels for non-overlapping spans.
std::vector<std::size_t> encode_labels(std::span<const EntitySpan> spans,
                                       std::size_t n_tokens);

// Text record, 17 significant digits per value:
//   ler-head 1
//   dim <d>
//   label_order PARTY DATE MONEY PROVISION OUTSIDE
//   digest <hex>            (optional)
//   W <C*d values>
//   b <C values>
void save_head(const LinearHead &head, const std::filesystem::path &path,
               const std::string &digest = {});
LinearHead load_head(const std::filesystem::path &path,
                     std::string *digest = nullptr);
std::string format_head(const LinearHead &head, const std::string &digest = {});
LinearHead parse_head(std::string_view text, std::string *digest = nullptr);

}  // namespace ler

#endif  // LER_CLASSIFIER_H_
