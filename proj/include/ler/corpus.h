#ifndef LER_CORPUS_H_
#define LER_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ler/types.h"

namespace ler {

// A tokenized document with its gold annotation.
//
// Invariants (enforced by validate_document and by every loader):
//  * token ranges lie inside the text, are non-empty, disjoint and strictly
//    increasing;
//  * gold spans reference valid token indices and never overlap or nest;
//  * distractor token indices are in range, strictly increasing and outside
//    every gold span.
//
// Distractors are tokens planted by the synthetic generator that look like
// entities in embedding space without being annotated. They carry no gold
// label; the corpus only records where they are.
struct Document {
  std::string id;
  std::string text;
  std::vector<TokenRef> tokens;
  std::vector<EntitySpan> gold_entities;
  std::vector<std::size_t> distractors;

  std::size_t token_count() const { return tokens.size(); }
  bool has_distractors() const { return !distractors.empty(); }

  friend bool operator==(const Document &, const Document &) = default;
};

using Corpus = std::vector<Document>;

struct CorpusSplit {
  Corpus train;
  Corpus test;
  double ratio = 0.8;
  std::uint64_t seed = 0;
};

// Whitespace + punctuation tokenizer. Splits on Unicode whitespace, then peels
// the characters .,;:()"'$% off both ends of every chunk as single-character
// tokens. Offsets are code point indices into the UTF-8 text; invalid bytes
// each count as one code point.
std::vector<TokenRef> tokenize(std::string_view text);

// UTF-8 substring for a code point range.
std::string token_text(std::string_view text, TokenRef token);

// Throws Error(kFormat) naming the first violated invariant.
void validate_document(const Document &doc);

// Line-delimited JSON corpus. Blank lines are skipped; errors report the
// 1-based line number.
Corpus load_corpus(const std::filesystem::path &path);
Corpus parse_corpus(std::string_view content);
void write_corpus(const Corpus &corpus, const std::filesystem::path &path);
std::string serialize_corpus(const Corpus &corpus);

// Document-level shuffle split; |train| = round(ratio * N).
CorpusSplit split_corpus(const Corpus &corpus, double ratio,
                         std::uint64_t seed);

// Templated legal-style documents covering all four labels. Exactly
// round(noise * n_docs) documents carry distractor tokens.
Corpus synth_corpus(std::size_t n_docs, double noise, std::uint64_t seed);

// FNV-1a digest of the serialized corpus.
std::uint64_t corpus_hash(const Corpus &corpus);

// Label per token under the IO scheme, with nullopt for OUTSIDE.
std::vector<std::optional<EntityLabel>> token_labels(const Document &doc);

}  // namespace ler

#endif  // LER_CORPUS_H_
