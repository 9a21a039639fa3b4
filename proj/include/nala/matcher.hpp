#pragma once
// 1-to-1 matching over top-K candidate lists: range filtering, recursive
// bidirectional matching with counterpart deletion, and swap refinement.

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nala/inference.hpp"

namespace nala {

// Global strict order on sentences: expectation descending, then left id,
// then right id. Within one KG1 list this breaks ties by right id; within one
// KG2 list by left id.
bool ranks_before(const SimilaritySentence& a, const SimilaritySentence& b);

class CandidateList {
 public:
  CandidateList(TermId owner, std::size_t k_sim);

  // Inserts in order and evicts the tail beyond k_sim. Throws
  // std::invalid_argument when s.left is not the owner.
  void insert_topk(const SimilaritySentence& s);

  TermId owner() const { return owner_; }
  std::size_t capacity() const { return k_sim_; }
  std::span<const SimilaritySentence> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  TermId owner_;
  std::size_t k_sim_;
  std::vector<SimilaritySentence> entries_;
};

// Range sets for the 1-to-1 assumption. A disabled filter keeps everything.
struct RangeFilter {
  bool enabled = false;
  std::unordered_set<TermId, TermIdHash> a1;
  std::unordered_set<TermId, TermIdHash> a2;

  bool keeps(const SimilaritySentence& s) const;
};

std::vector<SimilaritySentence> filter_range(std::vector<SimilaritySentence> sentences,
                                             const RangeFilter& range);

struct MatchedPair {
  TermId e1;
  TermId e2;
  TruthValue tv;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;  // sorted by e1
  std::vector<TermId> unmatched;   // KG1 list owners left without a partner, sorted

  // Throws std::logic_error when an entity occurs in two pairs.
  void check_one_to_one() const;
};

struct MatchStats {
  std::size_t max_depth = 0;
  std::size_t greedy_fallbacks = 0;
};

// State of one matching round. KG1 lists keep the given top-K order; every
// KG2 entity gets a reverse list holding all sentences that point to it.
// Deleting a sentence removes it from both sides.
class BidirectionalMatcher {
 public:
  explicit BidirectionalMatcher(std::span<const CandidateList> lists);

  // Matches `entity` (from either graph) and returns its partner, or nullopt
  // when its list runs empty. `previous` is the entity that asked.
  std::optional<TermId> match_and_delete(TermId entity, std::optional<TermId> previous = std::nullopt);

  // match_and_delete for every list owner in the given order.
  MatchResult run();

  std::optional<TermId> partner(TermId entity) const;
  const MatchStats& stats() const { return stats_; }

 private:
  struct Node {
    TermId id;
    std::vector<std::uint32_t> sentences;  // pool indices in list order
    std::size_t cursor = 0;                // first possibly-alive position
    std::int64_t match = -1;               // pool index of the matched sentence
  };

  std::uint32_t node_of(TermId id) const;
  std::optional<std::uint32_t> head(std::uint32_t node);
  std::uint32_t other_end(std::uint32_t sentence, std::uint32_t node) const;
  void commit(std::uint32_t node, std::uint32_t sentence);

  std::vector<SimilaritySentence> pool_;
  std::vector<char> alive_;
  std::vector<std::uint32_t> left_node_;
  std::vector<std::uint32_t> right_node_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> owners_;  // KG1 nodes in list order
  std::unordered_map<TermId, std::uint32_t, TermIdHash> index_;
  MatchStats stats_;
};

MatchResult rbmat(std::span<const CandidateList> lists);

struct SwapStats {
  std::size_t swaps = 0;
  std::size_t passes = 0;
  double total_before = 0.0;
  double total_after = 0.0;
};

// Swaps (e1a,e2a),(e1b,e2b) into (e1a,e2b),(e1b,e2a) while that strictly
// raises the summed expectation. Sentence values come from the lists as they
// were before matching; a missing sentence counts as 0. Partners for e1a are
// looked up only among the entries of e1a's list.
MatchResult swap_refine(MatchResult result, std::span<const CandidateList> snapshot_lists,
                        SwapStats* stats = nullptr, std::size_t max_passes = 100);

}  // namespace nala
