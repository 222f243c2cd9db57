#pragma once

#include <array>
#include <string>

#include "keystage/key_stage.hpp"

namespace keystage {

/// Classifier output for one chunk.
struct ChunkPrediction {
  std::string chunk_id;
  std::array<double, kNumClasses> probabilities{};
  KeyStage label = KeyStage::KS2;
  double confidence = 0.0;  // max probability
  /// True when a multimodal model answered from its linguistic branch only.
  bool fallback = false;
};

/// Label is the argmax with ties going to the lower Key Stage.
ChunkPrediction make_prediction(std::string chunk_id,
                                const std::array<double, kNumClasses>& probabilities);

}  // namespace keystage
