#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cfdx {

// Unit-normalized embedding. Values are finite and the L2 norm is 1.
struct EmbeddingVector {
  std::vector<double> values;

  [[nodiscard]] std::size_t dims() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

// Text -> fixed-dims real vector. Implementations must be safe to call from
// several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  [[nodiscard]] virtual std::string id() const = 0;
  [[nodiscard]] virtual std::size_t dims() const = 0;

  // Raw (possibly unnormalized) vector for a non-empty text.
  [[nodiscard]] virtual std::vector<double> embed_raw(std::string_view text) const = 0;
};

// Lowercases ASCII, hashes each byte trigram (FNV-1a 32) into 256 buckets
// and counts. Texts shorter than three bytes are hashed as a single gram.
class HashedTrigramEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kBuckets = 256;

  [[nodiscard]] std::string id() const override { return "hashed-trigram-256-fnv1a-v1"; }
  [[nodiscard]] std::size_t dims() const override { return kBuckets; }
  [[nodiscard]] std::vector<double> embed_raw(std::string_view text) const override;

  [[nodiscard]] static std::uint32_t bucket_of(std::string_view gram);
};

struct SimilarityWeights {
  double w_sim = 0.5;
  double w_edit = 0.5;

  // Throws InvalidConfig unless both are in [0,1] and sum to 1 within 1e-9.
  void validate() const;
};

// Errors: EmptyText, ProviderUnavailable.
[[nodiscard]] EmbeddingVector embed(std::string_view text, const EmbeddingProvider& provider);

[[nodiscard]] double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// clip01((cos(embed(a), embed(b)) + 1) / 2)
[[nodiscard]] double sem_sim(std::string_view a, std::string_view b,
                             const EmbeddingProvider& provider);

[[nodiscard]] double sem_sim(const EmbeddingVector& a, const EmbeddingVector& b);

// Gestalt pattern matching ratio 2M / (|a| + |b|) over Unicode code points.
// Throws BothEmpty when both inputs are empty.
[[nodiscard]] double edit_sim(std::string_view a, std::string_view b);

// Total length M of the gestalt matching blocks between two sequences.
[[nodiscard]] std::size_t gestalt_matches(std::span<const char32_t> a, std::span<const char32_t> b);

[[nodiscard]] double diag_shift(std::string_view d, std::string_view d_hat,
                                const EmbeddingProvider& provider);

[[nodiscard]] std::u32string decode_utf8(std::string_view text);

}  // namespace cfdx
