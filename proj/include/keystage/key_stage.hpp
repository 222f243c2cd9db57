#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace keystage {

/// UK national curriculum phase. KS1 only exists as a Lexile band; the
/// classifiers predict KS2..KS5.
enum class KeyStage : int { KS1 = 1, KS2 = 2, KS3 = 3, KS4 = 4, KS5 = 5 };

inline constexpr std::size_t kNumClasses = 4;

inline constexpr std::array<KeyStage, kNumClasses> kClassOrder = {
    KeyStage::KS2, KeyStage::KS3, KeyStage::KS4, KeyStage::KS5};

/// 0 for KS2 through 3 for KS5. KS1 has no class index.
std::size_t class_index(KeyStage stage);
KeyStage stage_from_index(std::size_t index);
constexpr int stage_value(KeyStage stage) { return static_cast<int>(stage); }

std::string to_string(KeyStage stage);
/// Accepts "KS2".."KS5" (case-insensitive). KS1 and anything else yield nullopt.
std::optional<KeyStage> parse_class_label(std::string_view label);

}  // namespace keystage
