#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cfdx {

// Two-sided exact McNemar test on the discordant counts b and c:
// min(1, 2 * P[X <= min(b, c)]) with X ~ Binomial(b + c, 1/2).
[[nodiscard]] double mcnemar_exact(std::uint64_t b, std::uint64_t c);

// Holm step-down adjustment; output is in input order. Throws EmptyInput.
[[nodiscard]] std::vector<double> holm_adjust(std::span<const double> p_values);

// Cohen's kappa over paired labels. The weighted form uses linear weights over
// the sorted set of observed labels. Throws LengthMismatch or EmptyInput.
[[nodiscard]] double cohen_kappa(std::span<const int> a, std::span<const int> b, bool weighted = false);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (ddof = 0)
};

// Throws EmptyInput.
[[nodiscard]] MeanStd mean_std(std::span<const double> values);

}  // namespace cfdx
