#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace alner {

// The fixed BIO tag inventory: O plus B-/I- pairs for PER, ORG, LOC and DATE.
// Order is stable and significant; TokenDistribution and the tagger index
// classes by position in this list.
inline constexpr std::size_t kNumLabels = 9;

inline constexpr std::array<std::string_view, kNumLabels> kLabels = {
    "O",     "B-PER", "I-PER", "B-ORG", "I-ORG",
    "B-LOC", "I-LOC", "B-DATE", "I-DATE"};

inline constexpr std::array<std::string_view, 4> kEntityClasses = {
    "PER", "ORG", "LOC", "DATE"};

// Case-sensitive lookup; nullopt for anything outside the inventory.
inline std::optional<std::size_t> label_index(std::string_view tag) {
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    if (kLabels[i] == tag) return i;
  }
  return std::nullopt;
}

inline bool is_valid_label(std::string_view tag) {
  return label_index(tag).has_value();
}

inline bool is_entity_label(std::string_view tag) { return tag != "O"; }

// "B-PER" / "I-PER" -> "PER"; nullopt for "O" or unknown tags.
inline std::optional<std::string> entity_class_of(std::string_view tag) {
  if (!is_valid_label(tag) || tag == "O") return std::nullopt;
  return std::string(tag.substr(2));
}

}  // namespace alner
