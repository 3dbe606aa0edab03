#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cfdx/similarity.hpp"

namespace cfdx {

struct PreservationScores {
  double sem_sim = 0.0;
  double edit_sim = 0.0;

  bool operator==(const PreservationScores&) const = default;
};

// Scores one original text against many edited texts. The original is
// embedded and decoded once; edits are scored in parallel.
[[nodiscard]] std::vector<PreservationScores> preservation_scores(
    std::string_view original, std::span<const std::string> edited, const EmbeddingProvider& provider);

// Single-threaded reference for preservation_scores; kept for tests and the
// benchmark.
[[nodiscard]] std::vector<PreservationScores> preservation_scores_serial(
    std::string_view original, std::span<const std::string> edited, const EmbeddingProvider& provider);

using TextPair = std::pair<std::string, std::string>;

[[nodiscard]] std::vector<double> edit_sim_batch(std::span<const TextPair> pairs);
[[nodiscard]] std::vector<double> edit_sim_batch_serial(std::span<const TextPair> pairs);

}  // namespace cfdx
