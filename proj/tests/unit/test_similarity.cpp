#include <gtest/gtest.h>

#include <random>

#include "cfdx/error.hpp"
#include "cfdx/kernels.hpp"
#include "cfdx/similarity.hpp"
#include "support/error_kind.hpp"
#include "support/oracles.hpp"

namespace {

using cfdx::ErrorKind;

const cfdx::HashedTrigramEmbedder kEmbedder;

using support::kind_of;

TEST(Embed, DeterministicAndUnitNorm) {
  const auto a = cfdx::embed("abc", kEmbedder);
  const auto b = cfdx::embed("abc", kEmbedder);
  EXPECT_EQ(a, b);
  double norm = 0;
  for (double v : cfdx::embed("Fever and chills for three days", kEmbedder).values) norm += v * v;
  EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
}

TEST(Embed, EmptyTextIsAnError) {
  EXPECT_EQ(kind_of([] { (void)cfdx::embed("   ", kEmbedder); }), ErrorKind::EmptyText);
}

TEST(Embed, BucketMatchesIndependentHash) {
  for (const std::string g : {"abc", "fev", "ver", "zz", "  x"}) {
    const auto counts = oracle::trigram_counts(g);
    EXPECT_EQ(cfdx::HashedTrigramEmbedder::bucket_of(g), counts.begin()->first) << g;
  }
}

TEST(SemSim, FallbackExamples) {
  EXPECT_NEAR(cfdx::cosine(cfdx::embed("fever", kEmbedder), cfdx::embed("fever", kEmbedder)), 1.0, 1e-12);
  EXPECT_NEAR(cfdx::sem_sim("aaaa", "bbbb", kEmbedder), 0.5, 1e-12);
  EXPECT_NEAR(cfdx::diag_shift("aaaa", "bbbb", kEmbedder), 0.5, 1e-12);
  EXPECT_NEAR(cfdx::diag_shift("Acute gout", "Acute gout", kEmbedder), 0.0, 1e-12);
}

TEST(SemSim, MatchesTrigramOracleAndIsSymmetric) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const std::string a = oracle::random_text(rng, 1, 30) + "q";
    const std::string b = oracle::random_text(rng, 1, 30) + "q";
    const double s = cfdx::sem_sim(a, b, kEmbedder);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(s, oracle::sem_sim(a, b), 1e-9);
    EXPECT_DOUBLE_EQ(s, cfdx::sem_sim(b, a, kEmbedder));
    EXPECT_NEAR(cfdx::sem_sim(a, a, kEmbedder), 1.0, 1e-12);
  }
}

TEST(EditSim, Examples) {
  EXPECT_DOUBLE_EQ(cfdx::edit_sim("abcd", "abcd"), 1.0);
  EXPECT_DOUBLE_EQ(cfdx::edit_sim("abcd", "abce"), 0.75);
  EXPECT_DOUBLE_EQ(cfdx::edit_sim("abcd", "cdab"), 0.5);
  EXPECT_DOUBLE_EQ(cfdx::edit_sim("", "abc"), 0.0);
  EXPECT_EQ(kind_of([] { (void)cfdx::edit_sim("", ""); }), ErrorKind::BothEmpty);
}

TEST(EditSim, CountsCodePointsNotBytes) {
  // "é" is two bytes but one code point: 2*1/(1+1).
  EXPECT_DOUBLE_EQ(cfdx::edit_sim("\xC3\xA9", "\xC3\xA9"), 1.0);
  EXPECT_DOUBLE_EQ(cfdx::edit_sim("a\xC3\xA9", "b\xC3\xA9"), 0.5);
}

TEST(EditSim, MatchesReferenceGestaltOnRandomPairs) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const std::string a = oracle::random_text(rng, 0, 40);
    std::string b = oracle::random_text(rng, 1, 40);
    if (i % 3 == 0) {
      // force shared blocks; back off to a code point boundary
      std::size_t cut = a.size() / 2;
      while (cut > 0 && (static_cast<unsigned char>(a[cut]) & 0xC0) == 0x80) --cut;
      b = a.substr(0, cut) + b;
    }
    const double got = cfdx::edit_sim(a, b);
    EXPECT_NEAR(got, oracle::gestalt_ratio(a, b), 1e-12) << a << " | " << b;
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 1.0);
  }
}

TEST(Kernels, ParallelMatchesSerial) {
  std::mt19937_64 rng(3);
  const std::string original = oracle::random_text(rng, 200, 300);
  std::vector<std::string> edits;
  for (int i = 0; i < 64; ++i) edits.push_back(original + oracle::random_text(rng, 5, 80));
  EXPECT_EQ(cfdx::preservation_scores(original, edits, kEmbedder),
            cfdx::preservation_scores_serial(original, edits, kEmbedder));

  std::vector<cfdx::TextPair> pairs;
  for (int i = 0; i < 64; ++i) pairs.emplace_back(oracle::random_text(rng, 1, 60), oracle::random_text(rng, 1, 60));
  const auto par = cfdx::edit_sim_batch(pairs);
  EXPECT_EQ(par, cfdx::edit_sim_batch_serial(pairs));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_DOUBLE_EQ(par[i], cfdx::edit_sim(pairs[i].first, pairs[i].second));
  }
}

TEST(Weights, Validation) {
  EXPECT_NO_THROW((cfdx::SimilarityWeights{0.5, 0.5}.validate()));
  EXPECT_EQ(kind_of([] { cfdx::SimilarityWeights{0.6, 0.5}.validate(); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([] { cfdx::SimilarityWeights{1.2, -0.2}.validate(); }), ErrorKind::InvalidConfig);
}

}  // namespace
