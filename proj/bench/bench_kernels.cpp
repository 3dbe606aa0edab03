// Parallel vs serial similarity kernels over synthetic clinical-style text.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "cfdx/kernels.hpp"

namespace {

std::string synthetic_text(std::mt19937_64& rng, std::size_t words) {
  static const std::vector<std::string> vocab{
      "patient", "reports", "fever",   "cough",    "denies", "chest",  "pain",      "history",
      "of",      "acute",   "chronic", "elevated", "normal", "no",     "troponin",  "dyspnea",
      "mild",    "severe",  "onset",   "days",     "left",   "right",  "radiating", "exam"};
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += vocab[pick(rng)];
  }
  return out;
}

// Edits share most of the original, as real counterfactual variants do.
std::vector<std::string> variants_of(const std::string& original, std::size_t n, std::mt19937_64& rng) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string v = original;
    const std::size_t at = rng() % v.size();
    v.insert(at, " not " + synthetic_text(rng, 3) + " ");
    out.push_back(std::move(v));
  }
  return out;
}

struct Workload {
  std::string original;
  std::vector<std::string> edited;
  std::vector<cfdx::TextPair> pairs;
};

Workload make_workload(std::size_t n, std::size_t words) {
  std::mt19937_64 rng(17);
  Workload w;
  w.original = synthetic_text(rng, words);
  w.edited = variants_of(w.original, n, rng);
  for (const auto& e : w.edited) w.pairs.emplace_back(w.original, e);
  return w;
}

void BM_PreservationParallel(benchmark::State& state) {
  const auto w = make_workload(static_cast<std::size_t>(state.range(0)), 200);
  const cfdx::HashedTrigramEmbedder embedder;
  for (auto _ : state) benchmark::DoNotOptimize(cfdx::preservation_scores(w.original, w.edited, embedder));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PreservationSerial(benchmark::State& state) {
  const auto w = make_workload(static_cast<std::size_t>(state.range(0)), 200);
  const cfdx::HashedTrigramEmbedder embedder;
  for (auto _ : state) benchmark::DoNotOptimize(cfdx::preservation_scores_serial(w.original, w.edited, embedder));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EditSimParallel(benchmark::State& state) {
  const auto w = make_workload(static_cast<std::size_t>(state.range(0)), 200);
  for (auto _ : state) benchmark::DoNotOptimize(cfdx::edit_sim_batch(w.pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EditSimSerial(benchmark::State& state) {
  const auto w = make_workload(static_cast<std::size_t>(state.range(0)), 200);
  for (auto _ : state) benchmark::DoNotOptimize(cfdx::edit_sim_batch_serial(w.pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_PreservationParallel)->Arg(9)->Arg(64)->Arg(256);
BENCHMARK(BM_PreservationSerial)->Arg(9)->Arg(64)->Arg(256);
BENCHMARK(BM_EditSimParallel)->Arg(9)->Arg(64)->Arg(256);
BENCHMARK(BM_EditSimSerial)->Arg(9)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
