#include "keystage/prediction.hpp"

#include "keystage/ann.hpp"

namespace keystage {

ChunkPrediction make_prediction(std::string chunk_id,
                                const std::array<double, kNumClasses>& probabilities) {
  ChunkPrediction p;
  p.chunk_id = std::move(chunk_id);
  p.probabilities = probabilities;
  const std::size_t best = ann::argmax(probabilities);
  p.label = stage_from_index(best);
  p.confidence = probabilities[best];
  return p;
}

}  // namespace keystage
