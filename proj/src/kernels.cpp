#include "cfdx/kernels.hpp"

#include "cfdx/error.hpp"
#include "cfdx/parallel.hpp"

namespace cfdx {

namespace {

double ratio(std::size_t matched, std::size_t total) {
  if (total == 0) throw Error(ErrorKind::BothEmpty, "edit_sim needs at least one non-empty input");
  return 2.0 * static_cast<double>(matched) / static_cast<double>(total);
}

PreservationScores score_one(const EmbeddingVector& original_vec, const std::u32string& original_cps,
                             const std::string& edited, const EmbeddingProvider& provider) {
  const std::u32string cps = decode_utf8(edited);
  PreservationScores s;
  s.sem_sim = sem_sim(original_vec, embed(edited, provider));
  s.edit_sim = ratio(gestalt_matches(original_cps, cps), original_cps.size() + cps.size());
  return s;
}

}  // namespace

std::vector<PreservationScores> preservation_scores(std::string_view original,
                                                    std::span<const std::string> edited,
                                                    const EmbeddingProvider& provider) {
  const EmbeddingVector original_vec = embed(original, provider);
  const std::u32string original_cps = decode_utf8(original);
  std::vector<PreservationScores> out(edited.size());
  parallel_for(edited.size(), [&](std::size_t i) {
    out[i] = score_one(original_vec, original_cps, edited[i], provider);
  });
  return out;
}

std::vector<PreservationScores> preservation_scores_serial(std::string_view original,
                                                           std::span<const std::string> edited,
                                                           const EmbeddingProvider& provider) {
  std::vector<PreservationScores> out;
  out.reserve(edited.size());
  for (const auto& e : edited) {
    out.push_back({sem_sim(original, e, provider), edit_sim(original, e)});
  }
  return out;
}

std::vector<double> edit_sim_batch(std::span<const TextPair> pairs) {
  std::vector<double> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) { out[i] = edit_sim(pairs[i].first, pairs[i].second); });
  return out;
}

std::vector<double> edit_sim_batch_serial(std::span<const TextPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) out.push_back(edit_sim(a, b));
  return out;
}

}  // namespace cfdx
