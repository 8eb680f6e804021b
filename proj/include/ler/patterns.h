#ifndef LER_PATTERNS_H_
#define LER_PATTERNS_H_

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ler/corpus.h"
#include "ler/embedding.h"

namespace ler {

// One reference vector per entity label, all of length `dim`, nonzero norm.
struct PatternRegistry {
  std::size_t dim = 0;
  std::array<std::vector<double>, kNumEntityLabels> patterns;

  const std::vector<double> &pattern(EntityLabel label) const {
    return patterns[label_index(label)];
  }

  friend bool operator==(const PatternRegistry &, const PatternRegistry &) = default;
};

// Throws Error(kFormat) if a vector is missing, mis-sized, non-finite or zero.
void validate_registry(const PatternRegistry &registry);

// Centroid of span centroids per label over the gold spans of `train_docs`.
// Neumaier-compensated sums keep the result independent of document order.
PatternRegistry build_patterns(const Corpus &train_docs,
                               const std::map<std::string, EmbeddingMatrix> &embeddings);

// JSON: {"dim": d, "patterns": {"PARTY": [...], ...}, "digest": "..."}.
// expected_dim == 0 skips the dimension check.
void save_patterns(const PatternRegistry &registry,
                   const std::filesystem::path &path,
                   const std::string &digest = {});
PatternRegistry load_patterns(const std::filesystem::path &path,
                              std::size_t expected_dim = 0,
                              std::string *digest = nullptr);
std::string format_patterns(const PatternRegistry &registry,
                            const std::string &digest = {});
PatternRegistry parse_patterns(std::string_view text, std::size_t expected_dim = 0,
                               std::string *digest = nullptr);

}  // namespace ler

#endif  // LER_PATTERNS_H_
