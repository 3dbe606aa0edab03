#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

// Code points of a UTF-8 string (inputs are generated valid).
inline std::vector<std::uint32_t> code_points(const std::string& s) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : 4;
    std::uint32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

// Brute-force gestalt matching: scan every (i, j) start pair for the longest
// common run, keep the first maximum, recurse on both sides.
inline std::size_t gestalt_matches(const std::vector<std::uint32_t>& a, std::size_t alo, std::size_t ahi,
                                   const std::vector<std::uint32_t>& b, std::size_t blo, std::size_t bhi) {
  std::size_t best = 0, bi = 0, bj = 0;
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      std::size_t k = 0;
      while (i + k < ahi && j + k < bhi && a[i + k] == b[j + k]) ++k;
      if (k > best) {
        best = k;
        bi = i;
        bj = j;
      }
    }
  }
  if (best == 0) return 0;
  return best + gestalt_matches(a, alo, bi, b, blo, bj) + gestalt_matches(a, bi + best, ahi, b, bj + best, bhi);
}

inline double gestalt_ratio(const std::string& x, const std::string& y) {
  const auto a = code_points(x);
  const auto b = code_points(y);
  const double m = static_cast<double>(gestalt_matches(a, 0, a.size(), b, 0, b.size()));
  return 2.0 * m / static_cast<double>(a.size() + b.size());
}

// Hashed character-trigram embedding: lowercase, FNV-1a 32 per trigram, 256
// buckets, counts. Short texts hash as one gram.
inline std::map<std::uint32_t, double> trigram_counts(const std::string& text) {
  std::string lower = text;
  for (char& c : lower) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  auto bucket = [](const std::string& g) {
    std::uint32_t h = 0x811C9DC5u;
    for (unsigned char c : g) {
      h ^= c;
      h *= 0x01000193u;
    }
    return h & 0xFFu;
  };
  std::map<std::uint32_t, double> counts;
  if (lower.size() < 3) {
    counts[bucket(lower)] += 1;
  } else {
    for (std::size_t i = 0; i + 3 <= lower.size(); ++i) counts[bucket(lower.substr(i, 3))] += 1;
  }
  return counts;
}

inline double trigram_cosine(const std::string& x, const std::string& y) {
  const auto a = trigram_counts(x);
  const auto b = trigram_counts(y);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [k, v] : a) {
    na += v * v;
    if (const auto it = b.find(k); it != b.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : b) nb += v * v;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double sem_sim(const std::string& x, const std::string& y) {
  return std::clamp((trigram_cosine(x, y) + 1.0) / 2.0, 0.0, 1.0);
}

inline double sip(double sem, double edit, double w_sim, double w_edit) { return w_sim * sem + w_edit * edit; }
inline double cpg(double p_base, double p_ce) { return p_base > p_ce ? p_base - p_ce : p_ce - p_base; }
inline double diag_shift(const std::string& d, const std::string& d_hat) { return 1.0 - sem_sim(d, d_hat); }
inline double combined(double cpg_v, double shift, double sip_v, double w_sig, double w_shift, double w_pre) {
  const double impact = cpg_v >= w_shift * shift ? cpg_v : w_shift * shift;
  return w_sig * impact + w_pre * sip_v;
}

// n choose k as a double via a product (exact for the small n used in tests).
inline long double binom(unsigned n, unsigned k) {
  long double r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Two-sided exact McNemar by enumerating the binomial tail.
inline double mcnemar(unsigned b, unsigned c) {
  const unsigned n = b + c;
  if (n == 0) return 1.0;
  const unsigned lo = std::min(b, c);
  long double tail = 0;
  for (unsigned k = 0; k <= lo; ++k) tail += binom(n, k);
  const long double p = 2 * tail / std::pow(2.0L, n);
  return static_cast<double>(std::min<long double>(1.0L, p));
}

// Random text over a small alphabet including multi-byte code points.
inline std::string random_text(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
  static const std::vector<std::string> alphabet{"a", "b", "c", "d", "e", " ", "f", "\xC3\xA9", "\xE4\xB8\xAD", "x"};
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string out;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) out += alphabet[pick(rng)];
  return out;
}

}  // namespace oracle
