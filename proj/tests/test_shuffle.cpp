#include "shufgda/shuffle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

using namespace shufgda;

namespace {

bool is_bijection(const Permutation& p) {
  std::vector<Index> v = p.order();
  std::sort(v.begin(), v.end());
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k] != static_cast<Index>(k)) return false;
  return true;
}

}  // namespace

TEST(Permutation, RejectsNonBijections) {
  EXPECT_THROW(Permutation({0, 0, 1}), InvalidArgument);
  EXPECT_THROW(Permutation({0, 3, 1}), InvalidArgument);
  EXPECT_THROW(Permutation({-1, 0}), InvalidArgument);
  EXPECT_NO_THROW(Permutation({2, 0, 1}));
}

TEST(Shuffle, EverySchemeYieldsBijections) {
  for (auto scheme : {Scheme::IG, Scheme::SO, Scheme::RR})
    for (Index n : {1, 2, 7, 100})
      for (std::int64_t t = 0; t < 5; ++t) {
        const ShufflingScheme s{scheme, 11, std::nullopt};
        EXPECT_TRUE(is_bijection(permutation_for_epoch(s, t, n)));
      }
}

TEST(Shuffle, IncrementalGradientUsesDataOrderOrGivenOrder) {
  ShufflingScheme s{Scheme::IG, 5, std::nullopt};
  EXPECT_EQ(permutation_for_epoch(s, 3, 6), Permutation::identity(6));
  s.ig_order = Permutation({3, 1, 0, 2});
  EXPECT_EQ(permutation_for_epoch(s, 0, 4), *s.ig_order);
  EXPECT_EQ(permutation_for_epoch(s, 9, 4), *s.ig_order);
  EXPECT_THROW(permutation_for_epoch(s, 0, 5), InvalidArgument);
}

TEST(Shuffle, ShuffleOnceReusesOnePermutation) {
  const ShufflingScheme s{Scheme::SO, 21, std::nullopt};
  const auto first = permutation_for_epoch(s, 0, 50);
  for (std::int64_t t = 1; t < 10; ++t) EXPECT_EQ(permutation_for_epoch(s, t, 50), first);
  EXPECT_NE(first, Permutation::identity(50));
}

TEST(Shuffle, RandomReshufflingDrawsFreshOrders) {
  const ShufflingScheme s{Scheme::RR, 21, std::nullopt};
  std::set<std::vector<Index>> seen;
  for (std::int64_t t = 0; t < 20; ++t) seen.insert(permutation_for_epoch(s, t, 50).order());
  EXPECT_EQ(seen.size(), 20u);
}

TEST(Shuffle, SeedDeterminesSequence) {
  const ShufflingScheme a{Scheme::RR, 4, std::nullopt}, b{Scheme::RR, 4, std::nullopt},
      c{Scheme::RR, 5, std::nullopt};
  for (std::int64_t t = 0; t < 5; ++t) {
    EXPECT_EQ(permutation_for_epoch(a, t, 30), permutation_for_epoch(b, t, 30));
    EXPECT_NE(permutation_for_epoch(a, t, 30), permutation_for_epoch(c, t, 30));
  }
}

TEST(Shuffle, RejectsEmptyAndNegativeEpoch) {
  const ShufflingScheme s{};
  EXPECT_THROW(permutation_for_epoch(s, 0, 0), InvalidArgument);
  EXPECT_THROW(permutation_for_epoch(s, -1, 3), InvalidArgument);
}

// Random reshuffling over S4: 24 equally likely orders. Chi-square with 23
// degrees of freedom; 49.73 is the 0.999 quantile.
TEST(Shuffle, ReshufflingIsUniformOverS4) {
  const ShufflingScheme s{Scheme::RR, 2024, std::nullopt};
  constexpr int kDraws = 48000;
  std::map<std::vector<Index>, int> counts;
  for (int t = 0; t < kDraws; ++t) ++counts[permutation_for_epoch(s, t, 4).order()];
  ASSERT_EQ(counts.size(), 24u);
  const double expected = kDraws / 24.0;
  double chi2 = 0.0;
  for (const auto& [perm, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 49.73);
}

TEST(Shuffle, ShuffleOnceIsUniformAcrossSeeds) {
  constexpr int kSeeds = 24000;
  std::map<std::vector<Index>, int> counts;
  for (int seed = 0; seed < kSeeds; ++seed)
    ++counts[permutation_for_epoch({Scheme::SO, static_cast<std::uint64_t>(seed), std::nullopt}, 0, 4)
                 .order()];
  ASSERT_EQ(counts.size(), 24u);
  const double expected = kSeeds / 24.0;
  double chi2 = 0.0;
  for (const auto& [perm, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 49.73);
}

TEST(Shuffle, SchemeNamesRoundTrip) {
  for (auto s : {Scheme::IG, Scheme::SO, Scheme::RR})
    EXPECT_EQ(scheme_from_string(to_string(s)), s);
  EXPECT_THROW(scheme_from_string("xx"), InvalidArgument);
}

TEST(Shuffle, OrderFileParsing) {
  std::istringstream ok("2\n0\n\n  1 \n");
  EXPECT_EQ(read_order(ok, 3), Permutation({2, 0, 1}));
  std::istringstream bad("2\nx\n1\n");
  try {
    read_order(bad, 3);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream short_list("0\n1\n");
  EXPECT_THROW(read_order(short_list, 3), InvalidArgument);
  std::istringstream dup("0\n0\n1\n");
  EXPECT_THROW(read_order(dup, 3), InvalidArgument);
}

TEST(Rng, StreamsAreDecorrelated) {
  auto a = make_rng(1, 0, RngStream::kReshuffle);
  auto b = make_rng(1, 0, RngStream::kSgdaSampling);
  auto c = make_rng(1, 0, RngStream::kReshuffle);
  const auto va = a(), vb = b(), vc = c();
  EXPECT_NE(va, vb);
  EXPECT_EQ(va, vc);
}
