#include "ler/embedding.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include <fmt/core.h>

#include "ler/error.h"
#include "util.h"

namespace ler {
namespace {

using internal::fail;
constexpr std::string_view kModule = "embedding";
constexpr char kMagic[4] = {'L', 'E', 'R', 'E'};
constexpr std::size_t kNumClasses = kNumEntityLabels + 1;

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

void put_u32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i]))
         << (8 * i);
  }
  return v;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64 &rng) {
  // 53 random bits mapped to (0, 1].
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

// Standard normal vector via Box-Muller on raw generator output, so values
// are identical across standard library implementations.
std::vector<double> gaussian_vector(std::uint64_t key, std::size_t dim) {
  std::mt19937_64 rng(key);
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < dim; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniform01(rng)));
    const double theta = 2.0 * M_PI * uniform01(rng);
    v[i] = r * std::cos(theta);
    if (i + 1 < dim) v[i + 1] = r * std::sin(theta);
  }
  return v;
}

double norm(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void normalize(std::vector<double> &v) {
  const double n = norm(v);
  for (double &x : v) x /= n;
}

double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::uint64_t token_key(const Document &doc, std::size_t token,
                        std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t h = internal::fnv1a(doc.id);
  h = splitmix64(h ^ splitmix64(token + 0x51ed27a3ULL * salt));
  return splitmix64(h ^ seed);
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::string doc_id, std::size_t n_tokens,
                                 std::size_t dim, std::vector<float> values)
    : doc_id_(std::move(doc_id)),
      n_tokens_(n_tokens),
      dim_(dim),
      values_(std::move(values)) {
  if (dim_ == 0) fail(ErrorCode::kInvalidArgument, kModule, "dim must be positive");
  if (values_.size() != n_tokens_ * dim_) {
    fail(ErrorCode::kInvalidArgument, kModule,
         fmt::format("expected {}x{} values, got {}", n_tokens_, dim_,
                     values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      fail(ErrorCode::kInvalidArgument, kModule,
           fmt::format("non-finite component at token {}, dim {}", i / dim_,
                       i % dim_));
    }
  }
}

std::string encode_embeddings(const EmbeddingMatrix &m) {
  std::string out;
  out.reserve(kEmbeddingHeaderBytes + m.values().size() * 4);
  out.append(kMagic, 4);
  put_u32(out, kEmbeddingFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(m.n_tokens()));
  put_u32(out, static_cast<std::uint32_t>(m.dim()));
  for (float f : m.values()) {
    if (!std::isfinite(f)) {
      fail(ErrorCode::kInvalidArgument, kModule, "non-finite component");
    }
    put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

EmbeddingMatrix decode_embeddings(std::string_view bytes, std::string doc_id) {
  if (bytes.size() < kEmbeddingHeaderBytes) {
    fail(ErrorCode::kFormat, kModule,
         fmt::format("truncated header: {} of {} bytes", bytes.size(),
                     kEmbeddingHeaderBytes));
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    fail(ErrorCode::kFormat, kModule, "bad magic");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kEmbeddingFormatVersion) {
    fail(ErrorCode::kFormat, kModule,
         fmt::format("unsupported version {}", version));
  }
  const std::uint64_t n_tokens = get_u32(bytes, 8);
  const std::uint64_t dim = get_u32(bytes, 12);
  if (dim == 0) fail(ErrorCode::kFormat, kModule, "dim must be positive");
  const std::uint64_t expected = n_tokens * dim * 4;
  const std::uint64_t actual = bytes.size() - kEmbeddingHeaderBytes;
  if (actual != expected) {
    fail(ErrorCode::kFormat, kModule,
         fmt::format("{} payload: expected {} bytes, found {}",
                     actual < expected ? "truncated" : "oversized", expected,
                     actual));
  }
  std::vector<float> values(n_tokens * dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(get_u32(bytes, kEmbeddingHeaderBytes + 4 * i));
    if (std::isnan(values[i])) {
      fail(ErrorCode::kFormat, kModule,
           fmt::format("NaN component at token {}, dim {}", i / dim, i % dim));
    }
    if (!std::isfinite(values[i])) {
      fail(ErrorCode::kFormat, kModule,
           fmt::format("infinite component at token {}, dim {}", i / dim, i % dim));
    }
  }
  return EmbeddingMatrix(std::move(doc_id), n_tokens, dim, std::move(values));
}

void write_embeddings(const EmbeddingMatrix &m, const std::filesystem::path &path) {
  internal::write_file_atomic(path, encode_embeddings(m), kModule);
}

EmbeddingMatrix read_embeddings(const std::filesystem::path &path) {
  const std::string bytes = internal::read_file(path, kModule);
  try {
    return decode_embeddings(bytes, path.stem().string());
  } catch (const Error &e) {
    fail(e.code(), kModule, path.string() + ": " + e.what());
  }
}

std::filesystem::path embedding_path(const std::filesystem::path &dir,
                                     const std::string &doc_id) {
  return dir / (doc_id + ".emb");
}

EmbeddingMatrix load_document_embeddings(const std::filesystem::path &dir,
                                         const Document &doc,
                                         std::size_t expected_dim) {
  EmbeddingMatrix m = read_embeddings(embedding_path(dir, doc.id));
  if (m.dim() != expected_dim) {
    fail(ErrorCode::kDimensionMismatch, kModule,
         fmt::format("document \"{}\": embedding dim {} vs configured {}",
                     doc.id, m.dim(), expected_dim));
  }
  if (m.n_tokens() != doc.token_count()) {
    fail(ErrorCode::kDimensionMismatch, kModule,
         fmt::format("document \"{}\": {} embedding rows vs {} tokens", doc.id,
                     m.n_tokens(), doc.token_count()));
  }
  return m;
}

std::vector<double> class_anchor(std::size_t class_index, std::size_t dim) {
  // Gram-Schmidt over fixed Gaussian draws; anchors past the dimension
  // budget fall back to plain normalized draws.
  std::vector<std::vector<double>> anchors;
  for (std::size_t c = 0; c <= class_index; ++c) {
    std::vector<double> v = gaussian_vector(splitmix64(0xA11C0000ULL + c), dim);
    if (c < dim) {
      for (const auto &prev : anchors) {
        const double p = dot(v, prev);
        for (std::size_t i = 0; i < dim; ++i) v[i] -= p * prev[i];
      }
    }
    normalize(v);
    anchors.push_back(std::move(v));
  }
  return anchors.back();
}

EntityLabel distractor_class(const Document &doc, std::size_t token,
                             std::uint64_t seed) {
  return kAllEntityLabels[token_key(doc, token, seed, 2) % kNumEntityLabels];
}

EmbeddingMatrix pseudo_embed(const Document &doc, std::size_t dim,
                             std::uint64_t seed, double signal) {
  if (dim < 2) fail(ErrorCode::kInvalidArgument, kModule, "pseudo_embed needs dim >= 2");
  if (!(signal >= 0.0 && signal <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, kModule,
         fmt::format("signal must lie in [0,1], got {}", signal));
  }
  std::vector<std::vector<double>> anchors(kNumClasses);
  for (std::size_t c = 0; c < kNumClasses; ++c) anchors[c] = class_anchor(c, dim);

  const auto labels = token_labels(doc);
  std::vector<bool> is_distractor(doc.token_count(), false);
  for (std::size_t d : doc.distractors) is_distractor[d] = true;

  std::vector<float> values(doc.token_count() * dim);
  for (std::size_t t = 0; t < doc.token_count(); ++t) {
    std::vector<double> noise = gaussian_vector(token_key(doc, t, seed, 1), dim);
    normalize(noise);
    std::vector<double> row(dim);
    if (is_distractor[t]) {
      const auto &anchor = anchors[label_index(distractor_class(doc, t, seed))];
      const double p = dot(noise, anchor);
      for (std::size_t i = 0; i < dim; ++i) noise[i] -= p * anchor[i];
      if (norm(noise) < 1e-9) {
        // Noise parallel to the anchor: rotate within the first two axes.
        noise.assign(dim, 0.0);
        noise[0] = -anchor[1];
        noise[1] = anchor[0];
      }
      normalize(noise);
      for (std::size_t i = 0; i < dim; ++i) {
        row[i] = signal * anchor[i] + kDistractorSpread * noise[i];
      }
    } else {
      const std::size_t c = labels[t] ? label_index(*labels[t]) : kNumEntityLabels;
      for (std::size_t i = 0; i < dim; ++i) {
        row[i] = signal * anchors[c][i] + (1.0 - signal) * noise[i];
      }
      if (norm(row) < 1e-6) row = anchors[c];
    }
    for (std::size_t i = 0; i < dim; ++i) {
      values[t * dim + i] = static_cast<float>(row[i]);
    }
  }
  return EmbeddingMatrix(doc.id, doc.token_count(), dim, std::move(values));
}

}  // namespace ler
