#include "ler/corpus.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

#include <fmt/core.h>
#include <json.hpp>

#include "ler/error.h"
#include "util.h"

namespace ler {
namespace {

using internal::fail;
using json = nlohmann::ordered_json;

constexpr std::string_view kModule = "corpus";

struct CodePoint {
  char32_t value;
  std::size_t byte_offset;
  std::size_t byte_length;
};

// Lenient UTF-8 decode: malformed bytes become U+FFFD, one per byte.
std::vector<CodePoint> decode_utf8(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (ok && len > 1) {
      static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
        ok = false;
    }
    if (!ok) {
      out.push_back({0xFFFD, i, 1});
      ++i;
    } else {
      out.push_back({cp, i, len});
      i += len;
    }
  }
  return out;
}

bool is_space(char32_t c) {
  if ((c >= 0x09 && c <= 0x0D) || c == 0x20) return true;
  switch (c) {
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_split_punct(char32_t c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '(': case ')':
    case '"': case '\'': case '$': case '%':
      return true;
    default:
      return false;
  }
}

// Independent generator streams per stage: synth and split draw from the
// same user seed and must not produce correlated shuffles.
std::mt19937_64 stage_rng(std::uint64_t seed, std::uint32_t stage) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), stage};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kSplitStage = 0x5b117;
constexpr std::uint32_t kSynthStage = 0x5e7d;

[[noreturn]] void fail_line(std::size_t line, const std::string &message) {
  fail(ErrorCode::kFormat, kModule, fmt::format("line {}: {}", line, message));
}

Document parse_record(const std::string &line_text, std::size_t line) {
  json j;
  try {
    j = json::parse(line_text);
  } catch (const json::parse_error &e) {
    fail_line(line, std::string("malformed record: ") + e.what());
  }
  if (!j.is_object()) fail_line(line, "malformed record: not an object");

  Document doc;
  try {
    doc.id = j.at("id").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    if (auto it = j.find("tokens"); it != j.end() && !it->is_null()) {
      for (const auto &t : *it) {
        doc.tokens.push_back({t.at("start").get<std::size_t>(),
                              t.at("end").get<std::size_t>()});
      }
    } else {
      doc.tokens = tokenize(doc.text);
    }
    if (auto it = j.find("entities"); it != j.end()) {
      for (const auto &e : *it) {
        const auto name = e.at("label").get<std::string>();
        const auto label = parse_label(name);
        if (!label) fail_line(line, "unknown label \"" + name + "\"");
        doc.gold_entities.push_back({e.at("start_token").get<std::size_t>(),
                                     e.at("end_token").get<std::size_t>(),
                                     *label});
      }
    }
    if (auto it = j.find("distractors"); it != j.end()) {
      doc.distractors = it->get<std::vector<std::size_t>>();
    }
  } catch (const json::exception &e) {
    fail_line(line, std::string("malformed record: ") + e.what());
  }

  try {
    validate_document(doc);
  } catch (const Error &e) {
    fail_line(line, e.what());
  }
  return doc;
}

json record_json(const Document &doc) {
  json j;
  j["id"] = doc.id;
  j["text"] = doc.text;
  json tokens = json::array();
  for (const auto &t : doc.tokens) tokens.push_back({{"start", t.start}, {"end", t.end}});
  j["tokens"] = std::move(tokens);
  json entities = json::array();
  for (const auto &e : doc.gold_entities) {
    entities.push_back({{"start_token", e.start_token},
                        {"end_token", e.end_token},
                        {"label", label_name(e.label)}});
  }
  j["entities"] = std::move(entities);
  if (!doc.distractors.empty()) j["distractors"] = doc.distractors;
  return j;
}

// ---------------------------------------------------------------------------
// Synthetic generator

constexpr std::array<std::string_view, 10> kParties = {
    "Acme Holdings Ltd", "Northwind Traders Inc", "John Smith",
    "Globex Corporation", "Initech LLC", "Jane Doe", "Stark Industries",
    "Wayne Enterprises", "Blue Harbor Partners LP", "Maria Gonzalez"};
constexpr std::array<std::string_view, 7> kDates = {
    "1 January 2020", "March 3, 2019", "15 June 2021", "30 September 2022",
    "12 May 2018", "December 31, 2023", "4 April 2017"};
constexpr std::array<std::string_view, 7> kAmounts = {
    "$5,000", "$1,250,000", "USD 300,000", "EUR 75,000", "$12.50",
    "GBP 2,400", "$48,000"};
constexpr std::array<std::string_view, 7> kProvisions = {
    "Section 4.2", "Article 12", "Section 9.1 of this Agreement", "Rule 26",
    "Paragraph 3", "Article 6 of the GDPR", "Clause 14"};

constexpr std::array<std::string_view, 10> kTemplates = {
    "This Agreement is entered into on {DATE} by and between {PARTY} and "
    "{PARTY}.",
    "{PARTY} shall pay {MONEY} to {PARTY} no later than {DATE}.",
    "Any dispute shall be resolved in accordance with {PROVISION}.",
    "The liability cap under {PROVISION} is limited to {MONEY}.",
    "{PARTY} agrees to the terms set out in {PROVISION}.",
    "Payment of {MONEY} is due on {DATE}.",
    "On {DATE} the court held that {PARTY} had breached {PROVISION}.",
    "Pursuant to {PROVISION}, a penalty of {MONEY} applies to {PARTY}.",
    "The lease commences on {DATE} and the monthly rent is {MONEY}.",
    "Notice under {PROVISION} was served on {PARTY} on {DATE}.",
};

// {X} marks the distractor token.
constexpr std::array<std::string_view, 4> kDistractorTemplates = {
    "{X} the foregoing, both sides shall cooperate in good faith.",
    "It is {X} understood that nothing herein is a waiver.",
    "The obligations described {X} remain in force.",
    "{X} all remedies are cumulative.",
};
constexpr std::array<std::string_view, 8> kDistractorWords = {
    "Notwithstanding", "Whereas", "Hereinafter", "Aforesaid",
    "Heretofore",      "Hereunder", "Thereof",   "Witnesseth"};

struct Slot {
  std::size_t start;  // code points; generator text is ASCII
  std::size_t end;
  std::optional<EntityLabel> label;  // nullopt marks a distractor
};

template <typename Array>
std::string_view pick(const Array &values, std::mt19937_64 &rng) {
  std::uniform_int_distribution<std::size_t> dist(0, values.size() - 1);
  return values[dist(rng)];
}

void append_template(std::string_view tmpl, std::mt19937_64 &rng,
                     std::string &text, std::vector<Slot> &slots) {
  if (!text.empty()) text += ' ';
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      text.append(tmpl.substr(pos));
      break;
    }
    text.append(tmpl.substr(pos, open - pos));
    const std::size_t close = tmpl.find('}', open);
    const std::string_view key = tmpl.substr(open + 1, close - open - 1);
    std::string_view value;
    std::optional<EntityLabel> label;
    if (key == "X") {
      value = pick(kDistractorWords, rng);
    } else {
      label = parse_label(key);
      switch (*label) {
        case EntityLabel::kParty: value = pick(kParties, rng); break;
        case EntityLabel::kDate: value = pick(kDates, rng); break;
        case EntityLabel::kMoney: value = pick(kAmounts, rng); break;
        case EntityLabel::kProvision: value = pick(kProvisions, rng); break;
      }
    }
    slots.push_back({text.size(), text.size() + value.size(), label});
    text.append(value);
    pos = close + 1;
  }
}

Document build_document(std::string id, bool with_distractors,
                        std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> n_sentences(3, 5);
  std::uniform_int_distribution<int> n_distractors(2, 4);
  std::vector<std::string_view> sentences;
  const int count = n_sentences(rng);
  for (int i = 0; i < count; ++i) sentences.push_back(pick(kTemplates, rng));
  if (with_distractors) {
    const int extra = n_distractors(rng);
    for (int i = 0; i < extra; ++i) {
      std::uniform_int_distribution<std::size_t> where(0, sentences.size());
      sentences.insert(sentences.begin() + static_cast<long>(where(rng)),
                       pick(kDistractorTemplates, rng));
    }
  }

  Document doc;
  doc.id = std::move(id);
  std::vector<Slot> slots;
  for (auto s : sentences) append_template(s, rng, doc.text, slots);
  doc.tokens = tokenize(doc.text);

  for (const Slot &slot : slots) {
    std::size_t first = doc.tokens.size();
    std::size_t last = 0;
    for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
      if (doc.tokens[t].start >= slot.start && doc.tokens[t].end <= slot.end) {
        first = std::min(first, t);
        last = t + 1;
      }
    }
    if (first >= last) {
      fail(ErrorCode::kInternal, kModule, "generator slot produced no tokens");
    }
    if (slot.label) {
      doc.gold_entities.push_back({first, last, *slot.label});
    } else {
      doc.distractors.push_back(first);
    }
  }
  std::sort(doc.distractors.begin(), doc.distractors.end());
  validate_document(doc);
  return doc;
}

}  // namespace

std::vector<TokenRef> tokenize(std::string_view text) {
  const std::vector<CodePoint> cps = decode_utf8(text);
  std::vector<TokenRef> tokens;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    while (i < n && is_space(cps[i].value)) ++i;
    if (i >= n) break;
    std::size_t end = i;
    while (end < n && !is_space(cps[end].value)) ++end;
    // Chunk [i, end): leading punctuation, core, trailing punctuation.
    std::size_t core_begin = i;
    while (core_begin < end && is_split_punct(cps[core_begin].value)) {
      tokens.push_back({core_begin, core_begin + 1});
      ++core_begin;
    }
    std::size_t core_end = end;
    while (core_end > core_begin && is_split_punct(cps[core_end - 1].value)) {
      --core_end;
    }
    if (core_begin < core_end) tokens.push_back({core_begin, core_end});
    for (std::size_t p = core_end; p < end; ++p) tokens.push_back({p, p + 1});
    i = end;
  }
  return tokens;
}

std::string token_text(std::string_view text, TokenRef token) {
  const std::vector<CodePoint> cps = decode_utf8(text);
  if (token.start >= token.end || token.end > cps.size()) return {};
  const std::size_t begin = cps[token.start].byte_offset;
  const std::size_t end =
      cps[token.end - 1].byte_offset + cps[token.end - 1].byte_length;
  return std::string(text.substr(begin, end - begin));
}

void validate_document(const Document &doc) {
  auto bad = [&](const std::string &what) {
    fail(ErrorCode::kFormat, kModule,
         fmt::format("document \"{}\": {}", doc.id, what));
  };
  if (doc.id.empty()) bad("empty id");
  const std::size_t n_chars = decode_utf8(doc.text).size();
  for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
    const TokenRef &tok = doc.tokens[t];
    if (tok.start >= tok.end) bad(fmt::format("token {} is empty", t));
    if (tok.end > n_chars) {
      bad(fmt::format("token {} range [{},{}) exceeds text length {}", t,
                      tok.start, tok.end, n_chars));
    }
    if (t > 0 && tok.start < doc.tokens[t - 1].end) {
      bad(fmt::format("token {} overlaps or precedes token {}", t, t - 1));
    }
  }
  const std::size_t n_tokens = doc.tokens.size();
  for (std::size_t k = 0; k < doc.gold_entities.size(); ++k) {
    const EntitySpan &span = doc.gold_entities[k];
    if (span.start_token >= span.end_token || span.end_token > n_tokens) {
      bad(fmt::format("span out of range: [{},{}) with {} tokens",
                      span.start_token, span.end_token, n_tokens));
    }
  }
  for (std::size_t a = 0; a < doc.gold_entities.size(); ++a) {
    for (std::size_t b = a + 1; b < doc.gold_entities.size(); ++b) {
      const auto &x = doc.gold_entities[a];
      const auto &y = doc.gold_entities[b];
      if (overlaps(x, y)) {
        bad(fmt::format("overlapping gold spans [{},{}) and [{},{})",
                        x.start_token, x.end_token, y.start_token,
                        y.end_token));
      }
    }
  }
  for (std::size_t k = 0; k < doc.distractors.size(); ++k) {
    const std::size_t d = doc.distractors[k];
    if (d >= n_tokens) bad(fmt::format("distractor index {} out of range", d));
    if (k > 0 && d <= doc.distractors[k - 1]) {
      bad("distractor indices not strictly increasing");
    }
    for (const auto &span : doc.gold_entities) {
      if (d >= span.start_token && d < span.end_token) {
        bad(fmt::format("distractor {} lies inside a gold span", d));
      }
    }
  }
}

Corpus parse_corpus(std::string_view content) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string line(content.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Document doc = parse_record(line, line_no);
    if (!ids.insert(doc.id).second) {
      fail_line(line_no, "duplicate document id \"" + doc.id + "\"");
    }
    corpus.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path &path) {
  return parse_corpus(internal::read_file(path, kModule));
}

std::string serialize_corpus(const Corpus &corpus) {
  std::string out;
  for (const Document &doc : corpus) {
    out += record_json(doc).dump();
    out += '\n';
  }
  return out;
}

void write_corpus(const Corpus &corpus, const std::filesystem::path &path) {
  for (const Document &doc : corpus) validate_document(doc);
  internal::write_file_atomic(path, serialize_corpus(corpus), kModule);
}

CorpusSplit split_corpus(const Corpus &corpus, double ratio,
                         std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    fail(ErrorCode::kInvalidArgument, kModule,
         fmt::format("split ratio must lie in (0,1), got {}", ratio));
  }
  if (corpus.size() < 2) {
    fail(ErrorCode::kInvalidArgument, kModule,
         fmt::format("cannot split a corpus of {} document(s)", corpus.size()));
  }
  const std::size_t n = corpus.size();
  const auto n_train =
      static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng = stage_rng(seed, kSplitStage);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  CorpusSplit split;
  split.ratio = ratio;
  split.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? split.train : split.test).push_back(corpus[i]);
  }
  return split;
}

Corpus synth_corpus(std::size_t n_docs, double noise, std::uint64_t seed) {
  if (n_docs < 1) {
    fail(ErrorCode::kInvalidArgument, kModule, "synth_corpus needs n_docs >= 1");
  }
  if (!(noise >= 0.0 && noise <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, kModule,
         fmt::format("noise must lie in [0,1], got {}", noise));
  }
  std::mt19937_64 rng = stage_rng(seed, kSynthStage);
  const auto n_noisy = static_cast<std::size_t>(
      std::llround(noise * static_cast<double>(n_docs)));
  std::vector<std::size_t> order(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> noisy(n_docs, false);
  for (std::size_t i = 0; i < n_noisy; ++i) noisy[order[i]] = true;

  Corpus corpus;
  corpus.reserve(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) {
    corpus.push_back(build_document(fmt::format("doc-{:05d}", i), noisy[i], rng));
  }
  return corpus;
}

std::uint64_t corpus_hash(const Corpus &corpus) {
  return internal::fnv1a(serialize_corpus(corpus));
}

std::vector<std::optional<EntityLabel>> token_labels(const Document &doc) {
  std::vector<std::optional<EntityLabel>> labels(doc.token_count());
  for (const auto &span : doc.gold_entities) {
    for (std::size_t t = span.start_token; t < span.end_token; ++t) {
      labels[t] = span.label;
    }
  }
  return labels;
}

}  // namespace ler
