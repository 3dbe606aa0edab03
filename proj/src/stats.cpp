#include "cfdx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfdx/error.hpp"

namespace cfdx {

namespace {

// Exact below this size: C(62, 31) and partial sums fit in uint64.
constexpr std::uint64_t kExactLimit = 62;

double lower_tail_exact(std::uint64_t n, std::uint64_t k) {
  std::uint64_t term = 1;  // C(n, 0)
  std::uint64_t sum = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // C(n, i) = C(n, i-1) * (n - i + 1) / i; exact because i divides the product.
    const std::uint64_t g = std::gcd(term, i);
    term = term / g * ((n - i + 1) / (i / g));
    sum += term;
  }
  return std::ldexp(static_cast<double>(sum), -static_cast<int>(n));
}

double lower_tail_log(std::uint64_t n, std::uint64_t k) {
  const double dn = static_cast<double>(n);
  std::vector<double> logs;
  logs.reserve(k + 1);
  for (std::uint64_t i = 0; i <= k; ++i) {
    const double di = static_cast<double>(i);
    logs.push_back(std::lgamma(dn + 1) - std::lgamma(di + 1) - std::lgamma(dn - di + 1) - dn * std::log(2.0));
  }
  const double peak = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - peak);
  return std::exp(peak + std::log(acc));
}

}  // namespace

double mcnemar_exact(std::uint64_t b, std::uint64_t c) {
  const std::uint64_t n = b + c;
  if (n == 0) return 1.0;
  const std::uint64_t k = std::min(b, c);
  const double tail = n <= kExactLimit ? lower_tail_exact(n, k) : lower_tail_log(n, k);
  return std::min(1.0, 2.0 * tail);
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
  if (p_values.empty()) throw Error(ErrorKind::EmptyInput, "holm_adjust needs at least one p-value");
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return p_values[x] < p_values[y]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const std::size_t idx = order[rank];
    running = std::max(running, std::min(1.0, static_cast<double>(m - rank) * p_values[idx]));
    adjusted[idx] = running;
  }
  return adjusted;
}

double cohen_kappa(std::span<const int> a, std::span<const int> b, bool weighted) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "label lists differ in length: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.empty()) throw Error(ErrorKind::EmptyInput, "cohen_kappa needs at least one pair");

  std::vector<int> labels(a.begin(), a.end());
  labels.insert(labels.end(), b.begin(), b.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const std::size_t k = labels.size();
  if (k == 1) return 1.0;

  auto index_of = [&](int v) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), v) - labels.begin());
  };
  std::vector<double> joint(k * k, 0.0);
  std::vector<double> row(k, 0.0);
  std::vector<double> col(k, 0.0);
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t x = index_of(a[i]);
    const std::size_t y = index_of(b[i]);
    joint[x * k + y] += 1.0 / n;
    row[x] += 1.0 / n;
    col[y] += 1.0 / n;
  }

  auto agreement_weight = [&](std::size_t x, std::size_t y) {
    if (!weighted) return x == y ? 1.0 : 0.0;
    const double gap = x > y ? static_cast<double>(x - y) : static_cast<double>(y - x);
    return 1.0 - gap / static_cast<double>(k - 1);
  };
  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t x = 0; x < k; ++x) {
    for (std::size_t y = 0; y < k; ++y) {
      const double w = agreement_weight(x, y);
      observed += w * joint[x * k + y];
      expected += w * row[x] * col[y];
    }
  }
  if (expected >= 1.0) return 1.0;
  return (observed - expected) / (1.0 - expected);
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "mean_std needs at least one value");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

}  // namespace cfdx
