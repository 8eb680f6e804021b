#ifndef LER_FILTER_H_
#define LER_FILTER_H_

#include <span>
#include <string>
#include <vector>

#include "ler/embedding.h"
#include "ler/patterns.h"
#include "ler/types.h"

namespace ler {

// Cosine similarity. Throws Error(kInvalidArgument) naming the zero-norm
// argument ("first" or "second") or on a length mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

// Mean of the span's token rows.
std::vector<double> entity_embedding(const EntitySpan &span, const EmbeddingMatrix &m);

enum class FilterReason {
  kAtOrAboveThreshold,
  kBelowThreshold,
  kZeroNormEntity,
};
std::string_view reason_name(FilterReason reason);

struct ScoredEntity {
  EntitySpan span;
  std::vector<double> entity_vector;
  double similarity = 0.0;  // 0 when the entity vector has zero norm
  bool retained = false;
  FilterReason reason = FilterReason::kBelowThreshold;
};

struct FilterResult {
  std::vector<EntitySpan> retained;
  std::vector<ScoredEntity> audit;  // one entry per input span, input order
};

// Scores each span against the pattern of its own label and keeps it iff
// similarity >= tau. A zero-norm entity vector is discarded with reason
// kZeroNormEntity.
FilterResult filter_entities(std::span<const EntitySpan> spans,
                             const EmbeddingMatrix &m,
                             const PatternRegistry &registry, double tau);

}  // namespace ler

#endif  // LER_FILTER_H_
