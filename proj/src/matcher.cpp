#include "nala/matcher.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace nala {

bool ranks_before(const SimilaritySentence& a, const SimilaritySentence& b) {
  const double ea = a.expectation();
  const double eb = b.expectation();
  if (ea != eb) return ea > eb;
  return std::tie(a.left, a.right) < std::tie(b.left, b.right);
}

CandidateList::CandidateList(TermId owner, std::size_t k_sim) : owner_(owner), k_sim_(k_sim) {
  if (k_sim == 0) throw std::invalid_argument("K_sim must be at least 1");
}

void CandidateList::insert_topk(const SimilaritySentence& s) {
  if (s.left != owner_) throw std::invalid_argument("sentence does not belong to this list");
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), s, ranks_before);
  if (static_cast<std::size_t>(pos - entries_.begin()) >= k_sim_) return;
  entries_.insert(pos, s);
  if (entries_.size() > k_sim_) entries_.pop_back();
}

bool RangeFilter::keeps(const SimilaritySentence& s) const {
  if (!enabled) return true;
  return a1.contains(s.left) == a2.contains(s.right);
}

std::vector<SimilaritySentence> filter_range(std::vector<SimilaritySentence> sentences,
                                             const RangeFilter& range) {
  if (!range.enabled) return sentences;
  std::erase_if(sentences, [&](const SimilaritySentence& s) { return !range.keeps(s); });
  return sentences;
}

void MatchResult::check_one_to_one() const {
  std::unordered_set<TermId, TermIdHash> seen;
  for (const MatchedPair& p : pairs) {
    if (!seen.insert(p.e1).second || !seen.insert(p.e2).second) {
      throw std::logic_error("matching is not 1-to-1");
    }
  }
}

// ---------------------------------------------------------------------------

BidirectionalMatcher::BidirectionalMatcher(std::span<const CandidateList> lists) {
  auto intern = [&](TermId id) {
    auto [it, inserted] = index_.try_emplace(id, static_cast<std::uint32_t>(nodes_.size()));
    if (inserted) nodes_.push_back(Node{id, {}, 0, -1});
    return it->second;
  };
  for (const CandidateList& list : lists) {
    const std::uint32_t owner = intern(list.owner());
    owners_.push_back(owner);
    for (const SimilaritySentence& s : list.entries()) {
      const auto idx = static_cast<std::uint32_t>(pool_.size());
      pool_.push_back(s);
      left_node_.push_back(owner);
      nodes_[owner].sentences.push_back(idx);
    }
  }
  alive_.assign(pool_.size(), 1);
  right_node_.resize(pool_.size());
  for (std::uint32_t i = 0; i < pool_.size(); ++i) {
    const std::uint32_t r = intern(pool_[i].right);
    right_node_[i] = r;
    nodes_[r].sentences.push_back(i);
  }
  // Reverse lists were filled in pool order.
  std::vector<char> is_owner(nodes_.size(), 0);
  for (std::uint32_t o : owners_) is_owner[o] = 1;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (is_owner[i]) continue;
    auto& list = nodes_[i].sentences;
    std::sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) {
      return ranks_before(pool_[a], pool_[b]);
    });
  }
}

std::uint32_t BidirectionalMatcher::node_of(TermId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::invalid_argument("entity has no candidate list");
  return it->second;
}

std::optional<std::uint32_t> BidirectionalMatcher::head(std::uint32_t node) {
  Node& n = nodes_[node];
  while (n.cursor < n.sentences.size() && !alive_[n.sentences[n.cursor]]) ++n.cursor;
  if (n.cursor == n.sentences.size()) return std::nullopt;
  return n.sentences[n.cursor];
}

std::uint32_t BidirectionalMatcher::other_end(std::uint32_t sentence, std::uint32_t node) const {
  return left_node_[sentence] == node ? right_node_[sentence] : left_node_[sentence];
}

void BidirectionalMatcher::commit(std::uint32_t node, std::uint32_t sentence) {
  const std::uint32_t partner = other_end(sentence, node);
  for (std::uint32_t end : {node, partner}) {
    nodes_[end].match = sentence;
    for (std::uint32_t s : nodes_[end].sentences) {
      if (s != sentence) alive_[s] = 0;
    }
  }
}

std::optional<TermId> BidirectionalMatcher::partner(TermId entity) const {
  const Node& n = nodes_[node_of(entity)];
  if (n.match < 0) return std::nullopt;
  const auto s = static_cast<std::uint32_t>(n.match);
  return nodes_[other_end(s, node_of(entity))].id;
}

std::optional<TermId> BidirectionalMatcher::match_and_delete(TermId entity,
                                                             std::optional<TermId> previous) {
  struct Frame {
    std::uint32_t node;
    std::int64_t previous;
  };
  const std::size_t depth_cap = nodes_.size();
  std::vector<Frame> stack;
  stack.push_back({node_of(entity), previous ? static_cast<std::int64_t>(node_of(*previous)) : -1});

  while (!stack.empty()) {
    Frame& frame = stack.back();
    stats_.max_depth = std::max(stats_.max_depth, stack.size());
    if (nodes_[frame.node].match >= 0) {
      stack.pop_back();
      continue;
    }
    const auto top = head(frame.node);
    if (!top) {
      stack.pop_back();
      continue;
    }
    const std::uint32_t candidate = other_end(*top, frame.node);
    if (static_cast<std::int64_t>(candidate) == frame.previous) {
      commit(frame.node, *top);
      stack.pop_back();
      continue;
    }
    if (stack.size() >= depth_cap) {
      // Cannot happen under the strict global order; kept as a guard.
      ++stats_.greedy_fallbacks;
      commit(frame.node, *top);
      stack.pop_back();
      continue;
    }
    // The candidate settles first. If it takes someone else, the sentence to
    // this entity is deleted and the head is re-read on the next turn.
    stack.push_back({candidate, frame.node});
  }
  return partner(entity);
}

MatchResult BidirectionalMatcher::run() {
  for (std::uint32_t owner : owners_) match_and_delete(nodes_[owner].id);
  MatchResult result;
  for (std::uint32_t owner : owners_) {
    const Node& n = nodes_[owner];
    if (n.match < 0) {
      result.unmatched.push_back(n.id);
      continue;
    }
    const SimilaritySentence& s = pool_[static_cast<std::size_t>(n.match)];
    result.pairs.push_back({s.left, s.right, s.tv});
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.e1 < b.e1; });
  std::sort(result.unmatched.begin(), result.unmatched.end());
  result.check_one_to_one();
  return result;
}

MatchResult rbmat(std::span<const CandidateList> lists) {
  BidirectionalMatcher matcher(lists);
  return matcher.run();
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t key(TermId a, TermId b) {
  return (static_cast<std::uint64_t>(a.value) << 32) | b.value;
}

}  // namespace

MatchResult swap_refine(MatchResult result, std::span<const CandidateList> snapshot_lists,
                        SwapStats* stats, std::size_t max_passes) {
  std::unordered_map<std::uint64_t, TruthValue> sentence;
  std::unordered_map<TermId, const CandidateList*, TermIdHash> list_of;
  for (const CandidateList& list : snapshot_lists) {
    list_of[list.owner()] = &list;
    for (const SimilaritySentence& s : list.entries()) sentence[key(s.left, s.right)] = s.tv;
  }
  auto tv_of = [&](TermId e1, TermId e2) {
    auto it = sentence.find(key(e1, e2));
    return it == sentence.end() ? TruthValue{0.0, 0.0} : it->second;
  };

  std::vector<MatchedPair>& pairs = result.pairs;
  std::unordered_map<TermId, std::size_t, TermIdHash> pair_of_e2;
  for (std::size_t i = 0; i < pairs.size(); ++i) pair_of_e2[pairs[i].e2] = i;

  SwapStats local;
  for (const MatchedPair& p : pairs) local.total_before += p.tv.expectation();

  bool changed = true;
  while (changed && local.passes < max_passes) {
    changed = false;
    ++local.passes;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      auto it = list_of.find(pairs[a].e1);
      if (it == list_of.end()) continue;
      for (const SimilaritySentence& s : it->second->entries()) {
        if (s.right == pairs[a].e2) continue;
        auto other = pair_of_e2.find(s.right);
        if (other == pair_of_e2.end()) continue;
        const std::size_t b = other->second;
        const TruthValue ab = s.tv;
        const TruthValue ba = tv_of(pairs[b].e1, pairs[a].e2);
        const double straight = pairs[a].tv.expectation() + pairs[b].tv.expectation();
        const double crossed = ab.expectation() + ba.expectation();
        if (!(crossed > straight)) continue;
        const TermId e2a = pairs[a].e2;
        pairs[a].e2 = s.right;
        pairs[a].tv = ab;
        pairs[b].e2 = e2a;
        pairs[b].tv = ba;
        pair_of_e2[pairs[a].e2] = a;
        pair_of_e2[pairs[b].e2] = b;
        ++local.swaps;
        changed = true;
        break;
      }
    }
  }
  for (const MatchedPair& p : pairs) local.total_after += p.tv.expectation();
  result.check_one_to_one();
  if (stats) *stats = local;
  return result;
}

}  // namespace nala
