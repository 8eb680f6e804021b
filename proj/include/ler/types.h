#ifndef LER_TYPES_H_
#define LER_TYPES_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ler {

// The four annotated entity classes. Values double as row indices into the
// classification head, which appends OUTSIDE as a fifth class.
enum class EntityLabel : std::uint8_t {
  kParty = 0,
  kDate = 1,
  kMoney = 2,
  kProvision = 3,
};

inline constexpr std::size_t kNumEntityLabels = 4;
inline constexpr std::array<EntityLabel, kNumEntityLabels> kAllEntityLabels = {
    EntityLabel::kParty, EntityLabel::kDate, EntityLabel::kMoney,
    EntityLabel::kProvision};

// Canonical strings: PARTY, DATE, MONEY, PROVISION.
std::string_view label_name(EntityLabel label);
std::optional<EntityLabel> parse_label(std::string_view name);

inline std::size_t label_index(EntityLabel label) {
  return static_cast<std::size_t>(label);
}

// Character range [start, end) of one token, in Unicode code points.
struct TokenRef {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const TokenRef &, const TokenRef &) = default;
};

// Half-open token range [start_token, end_token) carrying one label.
struct EntitySpan {
  std::size_t start_token = 0;
  std::size_t end_token = 0;
  EntityLabel label = EntityLabel::kParty;

  std::size_t length() const { return end_token - start_token; }

  friend bool operator==(const EntitySpan &, const EntitySpan &) = default;
  friend auto operator<=>(const EntitySpan &, const EntitySpan &) = default;
};

// True when the two spans share at least one token.
inline bool overlaps(const EntitySpan &a, const EntitySpan &b) {
  return a.start_token < b.end_token && b.start_token < a.end_token;
}

}  // namespace ler

#endif  // LER_TYPES_H_
