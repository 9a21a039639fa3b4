#include "nala/matcher.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "oracles.hpp"

using nala::CandidateList;
using nala::SimilaritySentence;
using nala::TermId;

namespace {

constexpr std::uint32_t kRightBase = 1u << 20;

TermId L(std::uint32_t i) { return TermId{i}; }
TermId R(std::uint32_t i) { return TermId{kRightBase + i}; }

// f = 1 so the expectation equals c.
SimilaritySentence sent(TermId l, TermId r, double exp) { return {l, r, {1.0, exp}}; }

std::vector<CandidateList> build_lists(const std::vector<oracle::Sentence>& sentences,
                                       std::uint32_t n_left, std::size_t k) {
  std::vector<CandidateList> lists;
  for (std::uint32_t l = 0; l < n_left; ++l) lists.emplace_back(L(l), k);
  for (const auto& s : sentences) lists[s.left].insert_topk({L(s.left), R(s.right), {s.f, s.c}});
  return lists;
}

std::map<std::uint32_t, std::vector<oracle::Sentence>> oracle_lists(
    const std::vector<CandidateList>& lists) {
  std::map<std::uint32_t, std::vector<oracle::Sentence>> out;
  for (const auto& list : lists) {
    auto& v = out[list.owner().value];
    for (const auto& s : list.entries()) {
      v.push_back({s.left.value, s.right.value - kRightBase, s.tv.f, s.tv.c});
    }
  }
  return out;
}

double total(const nala::MatchResult& r) {
  double sum = 0.0;
  for (const auto& p : r.pairs) sum += p.tv.expectation();
  return sum;
}

}  // namespace

TEST(CandidateList, InsertIntoEmpty) {
  CandidateList list(L(0), 3);
  list.insert_topk(sent(L(0), R(0), 0.4));
  ASSERT_EQ(list.size(), 1u);
}

TEST(CandidateList, EvictsBeyondCapacity) {
  CandidateList list(L(0), 2);
  list.insert_topk(sent(L(0), R(0), 0.9));
  list.insert_topk(sent(L(0), R(1), 0.5));
  list.insert_topk(sent(L(0), R(2), 0.7));
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list.entries()[0].right, R(0));
  EXPECT_EQ(list.entries()[1].right, R(2));
}

TEST(CandidateList, TiesOrderedByRightId) {
  CandidateList list(L(0), 5);
  list.insert_topk(sent(L(0), R(7), 0.5));
  list.insert_topk(sent(L(0), R(3), 0.5));
  list.insert_topk(sent(L(0), R(5), 0.5));
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list.entries()[0].right, R(3));
  EXPECT_EQ(list.entries()[1].right, R(5));
  EXPECT_EQ(list.entries()[2].right, R(7));
}

TEST(CandidateList, RejectsForeignSentence) {
  CandidateList list(L(0), 2);
  EXPECT_THROW(list.insert_topk(sent(L(1), R(0), 0.5)), std::invalid_argument);
  EXPECT_THROW(CandidateList(L(0), 0), std::invalid_argument);
}

TEST(FilterRange, Examples) {
  nala::RangeFilter range;
  const std::vector<SimilaritySentence> in{sent(L(0), R(0), 0.5), sent(L(1), R(1), 0.5),
                                           sent(L(1), R(0), 0.5), sent(L(0), R(1), 0.5)};
  EXPECT_EQ(nala::filter_range(in, range).size(), 4u);  // disabled
  range.enabled = true;
  range.a1 = {L(0)};
  range.a2 = {R(0)};
  const auto out = nala::filter_range(in, range);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].left, L(0));  // inside both
  EXPECT_EQ(out[0].right, R(0));
  EXPECT_EQ(out[1].left, L(1));  // outside both
  EXPECT_EQ(out[1].right, R(1));
}

TEST(Rbmat, MutualFirstChoices) {
  std::vector<CandidateList> lists;
  lists.emplace_back(L(0), 3);
  lists.emplace_back(L(1), 3);
  lists[0].insert_topk(sent(L(0), R(0), 0.9));
  lists[1].insert_topk(sent(L(1), R(1), 0.8));
  const auto result = nala::rbmat(lists);
  ASSERT_EQ(result.pairs.size(), 2u);
  EXPECT_EQ(result.pairs[0].e2, R(0));
  EXPECT_EQ(result.pairs[1].e2, R(1));
}

TEST(Rbmat, ThreeEntityInstance) {
  std::vector<CandidateList> lists;
  lists.emplace_back(L(0), 3);  // e1a
  lists.emplace_back(L(1), 3);  // e1b
  lists[0].insert_topk(sent(L(0), R(0), 0.9));
  lists[0].insert_topk(sent(L(0), R(1), 0.8));
  lists[1].insert_topk(sent(L(1), R(0), 0.95));
  nala::BidirectionalMatcher matcher(lists);
  EXPECT_EQ(matcher.match_and_delete(L(0)), R(1));
  EXPECT_EQ(matcher.partner(R(0)), L(1));
  // already matched: answers from the record
  EXPECT_EQ(matcher.match_and_delete(L(1)), R(0));
  EXPECT_EQ(matcher.match_and_delete(L(0)), R(1));
  const auto result = nala::rbmat(lists);
  ASSERT_EQ(result.pairs.size(), 2u);
  EXPECT_EQ(result.pairs[0].e2, R(1));
  EXPECT_EQ(result.pairs[1].e2, R(0));
  EXPECT_TRUE(result.unmatched.empty());
}

TEST(Rbmat, EmptyListIsUnmatched) {
  std::vector<CandidateList> lists;
  lists.emplace_back(L(0), 3);
  lists.emplace_back(L(1), 3);
  lists[1].insert_topk(sent(L(1), R(0), 0.3));
  const auto result = nala::rbmat(lists);
  ASSERT_EQ(result.pairs.size(), 1u);
  ASSERT_EQ(result.unmatched.size(), 1u);
  EXPECT_EQ(result.unmatched[0], L(0));
}

TEST(Rbmat, CompetitorExhaustsList) {
  std::vector<CandidateList> lists;
  lists.emplace_back(L(0), 1);
  lists.emplace_back(L(1), 1);
  lists[0].insert_topk(sent(L(0), R(0), 0.5));
  lists[1].insert_topk(sent(L(1), R(0), 0.6));
  const auto result = nala::rbmat(lists);
  ASSERT_EQ(result.pairs.size(), 1u);
  EXPECT_EQ(result.pairs[0].e1, L(1));
  EXPECT_EQ(result.unmatched, std::vector<TermId>{L(0)});
}

TEST(Rbmat, MatchesDeferredAcceptanceOnRandomInstances) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 120; ++trial) {
    const std::uint32_t nl = 5 + rng() % 150, nr = 5 + rng() % 150;
    const std::size_t k = trial % 2 ? 3 : 10;
    const bool coarse = trial % 3 == 0;
    const auto sentences = oracle::random_sentences(rng, nl, nr, 12, coarse);
    const auto lists = build_lists(sentences, nl, k);
    const auto result = nala::rbmat(lists);
    result.check_one_to_one();
    const auto ol = oracle_lists(lists);
    const auto want = oracle::gale_shapley(ol);
    std::map<std::uint32_t, std::uint32_t> got;
    for (const auto& p : result.pairs) got[p.e1.value] = p.e2.value - kRightBase;
    EXPECT_EQ(got, want) << "trial " << trial;
    EXPECT_EQ(oracle::blocking_pairs(ol, got, true), 0u);
    EXPECT_EQ(oracle::blocking_pairs(ol, got, false), 0u);
    EXPECT_EQ(result.pairs.size() + result.unmatched.size(), nl);
  }
}

TEST(Rbmat, Deterministic) {
  std::mt19937_64 rng(32);
  const auto sentences = oracle::random_sentences(rng, 120, 100, 10, true);
  const auto lists = build_lists(sentences, 120, 5);
  const auto a = nala::rbmat(lists);
  const auto b = nala::rbmat(lists);
  ASSERT_EQ(a.pairs.size(), b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    EXPECT_EQ(a.pairs[i].e1, b.pairs[i].e1);
    EXPECT_EQ(a.pairs[i].e2, b.pairs[i].e2);
  }
}

TEST(Rbmat, LongChainDoesNotOverflow) {
  // Left i prefers right i; right i prefers left i+1, whose own first choice
  // is right i+1. The first call walks the whole chain before anything settles.
  constexpr std::uint32_t n = 20000;
  constexpr double eps = 1e-5;
  std::vector<CandidateList> lists;
  for (std::uint32_t i = 0; i < n; ++i) {
    lists.emplace_back(L(i), 2);
    lists.back().insert_topk(sent(L(i), R(i), 0.5 + 2 * i * eps));
    if (i > 0) lists.back().insert_topk(sent(L(i), R(i - 1), 0.5 + (2 * i - 1) * eps));
  }
  nala::BidirectionalMatcher matcher(lists);
  const auto result = matcher.run();
  EXPECT_EQ(matcher.stats().greedy_fallbacks, 0u);
  EXPECT_EQ(matcher.stats().max_depth, 2 * n);
  ASSERT_EQ(result.pairs.size(), n);
  for (std::uint32_t i = 0; i < n; ++i) EXPECT_EQ(result.pairs[i].e2, R(i));
}

TEST(CheckOneToOne, DetectsDuplicates) {
  nala::MatchResult r;
  r.pairs = {{L(0), R(0), {1, 0.5}}, {L(1), R(0), {1, 0.5}}};
  EXPECT_THROW(r.check_one_to_one(), std::logic_error);
}

TEST(SwapRefine, CrossedPairSwapped) {
  std::vector<CandidateList> lists;
  lists.emplace_back(L(0), 3);
  lists.emplace_back(L(1), 3);
  lists[0].insert_topk(sent(L(0), R(0), 0.5));
  lists[0].insert_topk(sent(L(0), R(1), 0.9));
  lists[1].insert_topk(sent(L(1), R(1), 0.5));
  lists[1].insert_topk(sent(L(1), R(0), 0.8));
  nala::MatchResult straight;
  straight.pairs = {{L(0), R(0), {1, 0.5}}, {L(1), R(1), {1, 0.5}}};
  nala::SwapStats stats;
  const auto out = nala::swap_refine(straight, lists, &stats);
  ASSERT_EQ(out.pairs.size(), 2u);
  EXPECT_EQ(out.pairs[0].e2, R(1));
  EXPECT_EQ(out.pairs[1].e2, R(0));
  EXPECT_EQ(stats.swaps, 1u);
  EXPECT_NEAR(stats.total_before, 1.0, 1e-12);
  EXPECT_NEAR(stats.total_after, 1.7, 1e-12);
  EXPECT_NEAR(total(out), 1.7, 1e-12);
}

TEST(SwapRefine, EqualTotalsKept) {
  std::vector<CandidateList> lists;
  lists.emplace_back(L(0), 3);
  lists.emplace_back(L(1), 3);
  lists[0].insert_topk(sent(L(0), R(0), 0.5));
  lists[0].insert_topk(sent(L(0), R(1), 0.6));
  lists[1].insert_topk(sent(L(1), R(1), 0.5));
  lists[1].insert_topk(sent(L(1), R(0), 0.4));
  nala::MatchResult straight;
  straight.pairs = {{L(0), R(0), {1, 0.5}}, {L(1), R(1), {1, 0.5}}};
  nala::SwapStats stats;
  const auto out = nala::swap_refine(straight, lists, &stats);
  EXPECT_EQ(stats.swaps, 0u);
  EXPECT_EQ(out.pairs[0].e2, R(0));
}

TEST(SwapRefine, MissingSentenceCountsZero) {
  std::vector<CandidateList> lists;
  lists.emplace_back(L(0), 3);
  lists.emplace_back(L(1), 3);
  lists[0].insert_topk(sent(L(0), R(0), 0.3));
  lists[0].insert_topk(sent(L(0), R(1), 0.9));
  lists[1].insert_topk(sent(L(1), R(1), 0.4));
  nala::MatchResult straight;
  straight.pairs = {{L(0), R(0), {1, 0.3}}, {L(1), R(1), {1, 0.4}}};
  nala::SwapStats stats;
  const auto out = nala::swap_refine(straight, lists, &stats);
  EXPECT_EQ(stats.swaps, 1u);  // 0.9 + 0 > 0.3 + 0.4
  EXPECT_EQ(out.pairs[0].e2, R(1));
  EXPECT_NEAR(out.pairs[1].tv.expectation(), 0.0, 1e-15);
}

TEST(SwapRefine, NeverDecreasesTotalAndTerminates) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint32_t nl = 5 + rng() % 150, nr = 5 + rng() % 150;
    const std::size_t k = trial % 2 ? 3 : 10;
    const auto sentences = oracle::random_sentences(rng, nl, nr, 12, trial % 3 == 0);
    const auto lists = build_lists(sentences, nl, k);
    const auto matched = nala::rbmat(lists);
    nala::SwapStats stats;
    const auto out = nala::swap_refine(matched, lists, &stats);
    out.check_one_to_one();
    EXPECT_GE(total(out), total(matched) - 1e-12);
    EXPECT_NEAR(stats.total_after, total(out), 1e-9);
    EXPECT_LE(stats.swaps, out.pairs.size() * out.pairs.size());
    EXPECT_LT(stats.passes, 100u);
    EXPECT_EQ(out.pairs.size(), matched.pairs.size());
  }
}
