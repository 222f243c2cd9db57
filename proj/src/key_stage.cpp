#include "keystage/key_stage.hpp"

#include <cctype>

#include "keystage/errors.hpp"

namespace keystage {

std::size_t class_index(KeyStage stage) {
  if (stage == KeyStage::KS1) throw ValidationError("KS1 is not a classifier label");
  return static_cast<std::size_t>(stage_value(stage) - 2);
}

KeyStage stage_from_index(std::size_t index) {
  if (index >= kNumClasses) {
    throw ValidationError("class index out of range: " + std::to_string(index));
  }
  return kClassOrder[index];
}

std::string to_string(KeyStage stage) { return "KS" + std::to_string(stage_value(stage)); }

std::optional<KeyStage> parse_class_label(std::string_view label) {
  while (!label.empty() && std::isspace(static_cast<unsigned char>(label.front()))) {
    label.remove_prefix(1);
  }
  while (!label.empty() && std::isspace(static_cast<unsigned char>(label.back()))) {
    label.remove_suffix(1);
  }
  if (label.size() != 3) return std::nullopt;
  if (std::toupper(static_cast<unsigned char>(label[0])) != 'K' ||
      std::toupper(static_cast<unsigned char>(label[1])) != 'S') {
    return std::nullopt;
  }
  switch (label[2]) {
    case '2': return KeyStage::KS2;
    case '3': return KeyStage::KS3;
    case '4': return KeyStage::KS4;
    case '5': return KeyStage::KS5;
    default: return std::nullopt;
  }
}

}  // namespace keystage
