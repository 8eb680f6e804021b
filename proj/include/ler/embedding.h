#ifndef LER_EMBEDDING_H_
#define LER_EMBEDDING_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ler/corpus.h"

namespace ler {

// Per-document contextual embeddings: one row of `dim` float32 values per
// token, row-major. All components are finite.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  // Throws Error(kInvalidArgument) on dim == 0, a size mismatch or a
  // non-finite component.
  EmbeddingMatrix(std::string doc_id, std::size_t n_tokens, std::size_t dim,
                  std::vector<float> values);

  const std::string &doc_id() const { return doc_id_; }
  std::size_t n_tokens() const { return n_tokens_; }
  std::size_t dim() const { return dim_; }
  std::span<const float> row(std::size_t token) const {
    return {values_.data() + token * dim_, dim_};
  }
  const std::vector<float> &values() const { return values_; }

  friend bool operator==(const EmbeddingMatrix &, const EmbeddingMatrix &) = default;

 private:
  std::string doc_id_;
  std::size_t n_tokens_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

// Binary layout, little-endian:
//   0..3   magic "LERE"
//   4..7   version (u32) = 1
//   8..11  n_tokens (u32)
//   12..15 dim (u32)
//   16..   n_tokens * dim float32, token-major
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 16;

std::string encode_embeddings(const EmbeddingMatrix &m);
// `doc_id` is attached to the result; the file itself does not store it.
EmbeddingMatrix decode_embeddings(std::string_view bytes, std::string doc_id);

void write_embeddings(const EmbeddingMatrix &m, const std::filesystem::path &path);
EmbeddingMatrix read_embeddings(const std::filesystem::path &path);

// `<dir>/<doc_id>.emb`
std::filesystem::path embedding_path(const std::filesystem::path &dir,
                                     const std::string &doc_id);

// Loads the matrix for `doc` and checks its row count and dimension.
EmbeddingMatrix load_document_embeddings(const std::filesystem::path &dir,
                                         const Document &doc,
                                         std::size_t expected_dim);

// Fixed unit direction for a class (0..3 entity labels, 4 OUTSIDE). For
// dim >= 5 the five anchors are orthonormal.
std::vector<double> class_anchor(std::size_t class_index, std::size_t dim);

// Deterministic stand-in for an encoder. With s = signal and n a unit
// Gaussian noise direction hashed from (doc id, token index, seed):
//   span token of class c:   s * anchor(c) + (1 - s) * n
//   other token:             s * anchor(OUTSIDE) + (1 - s) * n
//   distractor token:        s * anchor(c') + kDistractorSpread * n_perp
// where c' is a class hashed from the token position and n_perp is n with
// its anchor(c') component removed.
inline constexpr double kDistractorSpread = 1.5;
EmbeddingMatrix pseudo_embed(const Document &doc, std::size_t dim,
                             std::uint64_t seed, double signal);

// The class a distractor token is pulled toward by pseudo_embed.
EntityLabel distractor_class(const Document &doc, std::size_t token,
                             std::uint64_t seed);

}  // namespace ler

#endif  // LER_EMBEDDING_H_
