#include "cfdx/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cfdx/error.hpp"
#include "cfdx/text.hpp"

namespace cfdx {

std::uint32_t HashedTrigramEmbedder::bucket_of(std::string_view gram) {
  std::uint32_t hash = 2166136261u;
  for (unsigned char c : gram) {
    hash ^= c;
    hash *= 16777619u;
  }
  return hash % kBuckets;
}

std::vector<double> HashedTrigramEmbedder::embed_raw(std::string_view text) const {
  const std::string lowered = ascii_lower(text);
  std::vector<double> counts(kBuckets, 0.0);
  if (lowered.size() < 3) {
    counts[bucket_of(lowered)] += 1.0;
    return counts;
  }
  for (std::size_t i = 0; i + 3 <= lowered.size(); ++i) {
    counts[bucket_of(std::string_view(lowered).substr(i, 3))] += 1.0;
  }
  return counts;
}

void SimilarityWeights::validate() const {
  if (!(w_sim >= 0.0 && w_sim <= 1.0 && w_edit >= 0.0 && w_edit <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "similarity weights must lie in [0,1]");
  }
  if (std::abs(w_sim + w_edit - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidConfig, "w_sim + w_edit must equal 1");
  }
}

EmbeddingVector embed(std::string_view text, const EmbeddingProvider& provider) {
  if (trim(text).empty()) {
    throw Error(ErrorKind::EmptyText, "cannot embed empty text");
  }
  std::vector<double> raw = provider.embed_raw(text);
  if (raw.size() != provider.dims()) {
    throw Error(ErrorKind::ProviderUnavailable,
                "provider " + provider.id() + " returned " + std::to_string(raw.size()) +
                    " dims, expected " + std::to_string(provider.dims()));
  }
  double norm2 = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::ProviderUnavailable, "provider " + provider.id() + " returned a non-finite value");
    }
    norm2 += v * v;
  }
  if (norm2 == 0.0) {
    throw Error(ErrorKind::ProviderUnavailable, "provider " + provider.id() + " returned a zero vector");
  }
  const double norm = std::sqrt(norm2);
  for (double& v : raw) v /= norm;
  return EmbeddingVector{std::move(raw)};
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dims() != b.dims()) {
    throw Error(ErrorKind::InvalidArgument, "embedding dims differ");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dims(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

double sem_sim(const EmbeddingVector& a, const EmbeddingVector& b) {
  return std::clamp((cosine(a, b) + 1.0) / 2.0, 0.0, 1.0);
}

double sem_sim(std::string_view a, std::string_view b, const EmbeddingProvider& provider) {
  return sem_sim(embed(a, provider), embed(b, provider));
}

double diag_shift(std::string_view d, std::string_view d_hat, const EmbeddingProvider& provider) {
  return 1.0 - sem_sim(d, d_hat, provider);
}

namespace {

struct Block {
  std::size_t a_start = 0;
  std::size_t b_start = 0;
  std::size_t size = 0;
};

// Longest common block inside a[alo,ahi) x b[blo,bhi). Among equal sizes the
// earliest start in a wins, then the earliest start in b.
Block longest_match(std::span<const char32_t> a, std::span<const char32_t> b, std::size_t alo,
                    std::size_t ahi, std::size_t blo, std::size_t bhi,
                    std::vector<std::size_t>& prev, std::vector<std::size_t>& cur) {
  Block best{alo, blo, 0};
  const std::size_t width = bhi - blo;
  std::fill(prev.begin(), prev.begin() + width + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    cur[0] = 0;
    for (std::size_t j = blo; j < bhi; ++j) {
      const std::size_t col = j - blo + 1;
      if (a[i] == b[j]) {
        const std::size_t len = prev[col - 1] + 1;
        cur[col] = len;
        if (len > best.size) {
          best = Block{i + 1 - len, j + 1 - len, len};
        }
      } else {
        cur[col] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace

std::size_t gestalt_matches(std::span<const char32_t> a, std::span<const char32_t> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::size_t matched = 0;
  struct Range {
    std::size_t alo, ahi, blo, bhi;
  };
  std::vector<Range> pending{{0, a.size(), 0, b.size()}};
  while (!pending.empty()) {
    const Range r = pending.back();
    pending.pop_back();
    if (r.alo >= r.ahi || r.blo >= r.bhi) continue;
    const Block m = longest_match(a, b, r.alo, r.ahi, r.blo, r.bhi, prev, cur);
    if (m.size == 0) continue;
    matched += m.size;
    pending.push_back({r.alo, m.a_start, r.blo, m.b_start});
    pending.push_back({m.a_start + m.size, r.ahi, m.b_start + m.size, r.bhi});
  }
  return matched;
}

double edit_sim(std::string_view a, std::string_view b) {
  const std::u32string ua = decode_utf8(a);
  const std::u32string ub = decode_utf8(b);
  const std::size_t total = ua.size() + ub.size();
  if (total == 0) {
    throw Error(ErrorKind::BothEmpty, "edit_sim needs at least one non-empty input");
  }
  const std::size_t m = gestalt_matches(ua, ub);
  return 2.0 * static_cast<double>(m) / static_cast<double>(total);
}

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (c0 < 0x80) {
      len = 1;
      cp = c0;
    } else if ((c0 & 0xE0) == 0xC0) {
      len = 2;
      cp = c0 & 0x1F;
    } else if ((c0 & 0xF0) == 0xE0) {
      len = 3;
      cp = c0 & 0x0F;
    } else if ((c0 & 0xF8) == 0xF0) {
      len = 4;
      cp = c0 & 0x07;
    }
    bool ok = len > 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto ck = static_cast<unsigned char>(text[i + k]);
      if ((ck & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (ck & 0x3F);
      }
    }
    if (!ok) {
      // Invalid byte: keep it distinguishable from every valid code point.
      out.push_back(static_cast<char32_t>(0xDC00 + c0));
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

}  // namespace cfdx
