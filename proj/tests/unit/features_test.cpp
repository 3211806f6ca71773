#include <gtest/gtest.h>

#include <set>

#include "../support/oracles.hpp"
#include "monoseq/errors.hpp"
#include "monoseq/features.hpp"

using namespace monoseq;

namespace {

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

std::size_t expected_count(std::size_t w, std::size_t n) {
  std::size_t total = 0;
  for (std::size_t m = 1; m <= n; ++m) total += 2 * w + 2 - m;
  return total;
}

}  // namespace

TEST(Extract, UnigramWindow) {
  const auto f = extract(U"cat", 1, {1, 1});
  EXPECT_EQ(as_set(f), (std::set<std::string>{"off=-1:len=1:c", "off=0:len=1:a", "off=1:len=1:t"}));
  EXPECT_EQ(f.size(), 3u);
}

TEST(Extract, PaddedBigramsMatchEnumeration) {
  const FeatureConfig cfg{2, 2};
  const auto f = extract(U"ab", 0, cfg);
  EXPECT_EQ(as_set(f), oracle::window_features(U"ab", 0, 2, 2, kBoundarySymbol));
  EXPECT_EQ(f.size(), expected_count(2, 2));
}

TEST(Extract, CountFormulaAtEveryPosition) {
  const Symbols s = U"Studerfirn";
  for (std::size_t w = 1; w <= 4; ++w)
    for (std::size_t n = 1; n <= 2 * w + 1; ++n)
      for (std::size_t p = 0; p < s.size(); ++p) {
        const auto f = extract(s, p, {w, n});
        EXPECT_EQ(f.size(), expected_count(w, n));
        EXPECT_EQ(as_set(f).size(), f.size());
        EXPECT_EQ(as_set(f), oracle::window_features(s, p, w, n, kBoundarySymbol));
      }
}

TEST(Extract, OffsetsDistinguishPositions) {
  const auto f = as_set(extract(U"aba", 1, {1, 1}));
  EXPECT_TRUE(f.contains("off=-1:len=1:a"));
  EXPECT_TRUE(f.contains("off=1:len=1:a"));
}

TEST(Extract, IdenticalWindowsGiveIdenticalFeatures) {
  const Symbols s = U"xabcyabcz";
  EXPECT_EQ(extract(s, 2, {1, 3}), extract(s, 6, {1, 3}));
}

TEST(Extract, OutOfRange) {
  EXPECT_THROW(extract(U"ab", 2, {1, 1}), ArgumentError);
  EXPECT_THROW(extract(U"ab", 0, {1, 4}), ArgumentError);
}

TEST(FeatureTable, DenseFirstSeenIds) {
  FeatureTable t;
  EXPECT_EQ(t.intern("x"), 0u);
  EXPECT_EQ(t.intern("y"), 1u);
  EXPECT_EQ(t.intern("x"), 0u);
  EXPECT_EQ(t.intern("z"), 2u);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.name(1), "y");
}

TEST(FeatureTable, FrozenMapsUnseenToUnknown) {
  FeatureTable t;
  t.intern("seen");
  t.freeze();
  EXPECT_EQ(t.intern("unseen"), kUnknownFeature);
  EXPECT_EQ(t.lookup("unseen"), kUnknownFeature);
  EXPECT_EQ(t.intern("seen"), 0u);
  EXPECT_EQ(t.size(), 1u);
}

TEST(Featurize, InternsEveryPosition) {
  FeatureTable t;
  const auto ids = featurize(U"abc", {1, 2}, t);
  ASSERT_EQ(ids.size(), 3u);
  for (std::size_t p = 0; p < 3; ++p) {
    const auto names = extract(U"abc", p, {1, 2});
    ASSERT_EQ(ids[p].size(), names.size());
    for (std::size_t k = 0; k < names.size(); ++k) EXPECT_EQ(t.name(ids[p][k]), names[k]);
  }
}
