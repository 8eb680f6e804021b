#include "ler/filter.h"

#include <cmath>

#include <fmt/core.h>

#include "ler/error.h"
#include "util.h"

namespace ler {
namespace {

using internal::fail;
constexpr std::string_view kModule = "filter";

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::kDimensionMismatch, kModule,
         fmt::format("cosine of vectors with lengths {} and {}", a.size(), b.size()));
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (!(aa > 0.0)) fail(ErrorCode::kInvalidArgument, kModule, "cosine: first argument has zero norm");
  if (!(bb > 0.0)) fail(ErrorCode::kInvalidArgument, kModule, "cosine: second argument has zero norm");
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

std::vector<double> entity_embedding(const EntitySpan &span, const EmbeddingMatrix &m) {
  if (span.start_token >= span.end_token || span.end_token > m.n_tokens()) {
    fail(ErrorCode::kInvalidArgument, kModule,
         fmt::format("span [{},{}) out of range for {} embedding rows",
                     span.start_token, span.end_token, m.n_tokens()));
  }
  std::vector<double> v(m.dim(), 0.0);
  for (std::size_t t = span.start_token; t < span.end_token; ++t) {
    const auto row = m.row(t);
    for (std::size_t j = 0; j < m.dim(); ++j) v[j] += row[j];
  }
  const auto n = static_cast<double>(span.length());
  for (double &x : v) x /= n;
  return v;
}

std::string_view reason_name(FilterReason reason) {
  switch (reason) {
    case FilterReason::kAtOrAboveThreshold: return "similarity>=tau";
    case FilterReason::kBelowThreshold: return "similarity<tau";
    case FilterReason::kZeroNormEntity: return "zero-norm entity vector";
  }
  return "?";
}

FilterResult filter_entities(std::span<const EntitySpan> spans,
                             const EmbeddingMatrix &m,
                             const PatternRegistry &registry, double tau) {
  if (!std::isfinite(tau)) {
    fail(ErrorCode::kInvalidArgument, kModule, "threshold must be finite");
  }
  if (registry.dim != m.dim()) {
    fail(ErrorCode::kDimensionMismatch, kModule,
         fmt::format("registry dim {} vs embedding dim {}", registry.dim, m.dim()));
  }
  FilterResult result;
  result.audit.reserve(spans.size());
  for (const EntitySpan &span : spans) {
    ScoredEntity scored;
    scored.span = span;
    scored.entity_vector = entity_embedding(span, m);
    double sq = 0.0;
    for (double x : scored.entity_vector) sq += x * x;
    if (!(sq > 0.0)) {
      scored.reason = FilterReason::kZeroNormEntity;
      internal::log(1, fmt::format("document \"{}\": span [{},{}) has a zero-norm "
                                   "entity vector, discarded",
                                   m.doc_id(), span.start_token, span.end_token));
    } else {
      scored.similarity = cosine(scored.entity_vector, registry.pattern(span.label));
      scored.retained = !(scored.similarity < tau);
      scored.reason = scored.retained ? FilterReason::kAtOrAboveThreshold
                                      : FilterReason::kBelowThreshold;
    }
    if (scored.retained) result.retained.push_back(span);
    result.audit.push_back(std::move(scored));
  }
  return result;
}

}  // namespace ler
