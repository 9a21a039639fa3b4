#pragma once
// Similarity inference over the three path types.
//
//   type I   entity evidence through a bridge of triples
//            (x1, r1, y1) + x1 <-> x2 + (x2, r2, y2)  =>  y1 <-> y2
//   type II  entity evidence from name/description embeddings
//   type III relation inheritance r1 -> r2 from aligned triple skeletons
//
// All entry points read only frozen state and may be called concurrently.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nala/kg.hpp"
#include "nala/side_info.hpp"
#include "nala/truth.hpp"

namespace nala {

struct SimilaritySentence {
  TermId left;   // KG1 entity
  TermId right;  // KG2 entity
  TruthValue tv;

  double expectation() const { return tv.expectation(); }
};

enum class PathType : std::uint8_t { kI, kII, kIII };

std::string_view to_string(PathType type);

struct PremiseRecord {
  std::string statement;
  TruthValue tv;
};

struct PathEvidence {
  PathType type;
  std::vector<PremiseRecord> premises;
  TruthValue conclusion;
};

// Intermediate conclusions of the type I chain.
struct Type1Chain {
  TruthValue relation_on_target;   // (*,x1,y1) -> r2
  TruthValue analog_triple;        // (*,x1,y2) -> r2
  TruthValue functional_rule;      // ((*,x1,$c) -> r2 && r2 -> [fun]) => y1 <-> $c
  TruthValue conditional;          // r2 -> [fun] => y1 <-> y2
  TruthValue conclusion;           // y1 <-> y2
};

// The two triples and the functionality definition are facts <1,1>; the
// functionality premise r2 -> [fun] is <functionality, 1>.
Type1Chain type1_chain(const TruthValue& rel_inheritance, const TruthValue& pair_similarity,
                       double functionality);
TruthValue type1_truth(const TruthValue& rel_inheritance, const TruthValue& pair_similarity,
                       double functionality);

// Type III conclusion of one skeleton. `present` selects the positive
// version, where the moved triple is a fact <1,1>; otherwise it is
// <0, c_absent>.
TruthValue type3_truth(const TruthValue& source_similarity, const TruthValue& target_similarity,
                       bool present, double c_absent);

// Folds type I conclusions with probabilistic revision, then revises the
// result with each type II sentence.
SimilaritySentence aggregate_candidate(TermId y1, TermId y2, std::span<const TruthValue> type1,
                                       std::span<const TruthValue> type2);

struct ScoredPartner {
  TermId partner;
  TruthValue tv;
};

// Entity similarities usable as bridge or skeleton premises. Keeps one
// entry per pair; the first insertion wins.
class EntitySimilarities {
 public:
  void add(TermId e1, TermId e2, const TruthValue& tv);
  std::span<const ScoredPartner> forward(TermId e1) const;   // KG1 -> KG2
  std::span<const ScoredPartner> backward(TermId e2) const;  // KG2 -> KG1
  std::size_t size() const { return count_; }

 private:
  std::unordered_map<TermId, std::vector<ScoredPartner>, TermIdHash> forward_;
  std::unordered_map<TermId, std::vector<ScoredPartner>, TermIdHash> backward_;
  std::size_t count_ = 0;
};

// Directed inheritance between relations of different graphs, keyed by
// (from, to).
class RelationInheritance {
 public:
  void set(TermId from, TermId to, const TruthValue& tv);
  std::optional<TruthValue> find(TermId from, TermId to) const;
  std::size_t size() const { return entries_.size(); }

  struct Entry {
    TermId from;
    TermId to;
    TruthValue tv;
  };
  // Sorted by (from, to).
  std::vector<Entry> entries() const;

 private:
  std::unordered_map<std::uint64_t, TruthValue> entries_;
};

struct AlignmentSnapshot {
  int iteration = 0;
  EntitySimilarities entities;
  RelationInheritance inheritance;
  // Every relation pair gets <1, iota> instead of a type III result.
  bool use_default_inheritance = true;
};

struct InferenceParams {
  double iota = 0.5;
  double theta = 0.1;
  double c_absent = 0.5;
  // Confidence of type II sentences per name channel; 0 disables a channel.
  std::array<double, 3> c_name{0.0, 0.0, 0.0};
  // Emit the r2 -> r1 variation of every type I path.
  bool symmetric_type1 = true;
  unsigned threads = 1;
};

struct Type1Path {
  TermId x1, r1, x2, r2, y2;
  bool reverse_direction;  // inheritance read as r2 -> r1
  TruthValue inheritance;
  TruthValue pair_similarity;
  double functionality;
  TruthValue conclusion;
};

struct Type2Sentence {
  TermId y2;
  Channel channel;
  double cosine;
  TruthValue tv;
};

struct Explanation {
  SimilaritySentence sentence;
  std::vector<PathEvidence> paths;
};

class InferenceEngine {
 public:
  InferenceEngine(const KgPair& kgs, const SideInfo& side_info, InferenceParams params);

  const InferenceParams& params() const { return params_; }

  // Premise partners of x (entity or literal) in the other graph, already
  // filtered by theta.
  std::vector<ScoredPartner> partners(Side from, TermId x, const AlignmentSnapshot& snapshot) const;

  // Every type I path ending at y1 in enumeration order, optionally
  // restricted to one target y2. Zero-evidence conclusions are dropped.
  std::vector<Type1Path> enumerate_type1(TermId y1, const AlignmentSnapshot& snapshot,
                                         std::optional<TermId> only = std::nullopt) const;

  // Type I conclusions aggregated per candidate, in first-seen order.
  std::vector<std::pair<TermId, TruthValue>> infer_type1(TermId y1,
                                                         const AlignmentSnapshot& snapshot) const;

  // One sentence per embedded y2 and enabled channel.
  std::vector<Type2Sentence> infer_type2(TermId y1) const;

  // Aggregated sentences for every candidate of y1.
  std::vector<SimilaritySentence> candidates(TermId y1, const AlignmentSnapshot& snapshot) const;

  // Recomputes the sentence y1 <-> y2 with the premises of every path.
  Explanation explain(TermId y1, TermId y2, const AlignmentSnapshot& snapshot) const;

  // Relation inheritance in both directions from the snapshot's entity
  // similarities.
  RelationInheritance infer_type3(const AlignmentSnapshot& snapshot) const;

 private:
  std::optional<TruthValue> inheritance(const AlignmentSnapshot& snapshot, TermId from,
                                        TermId to) const;
  void type3_direction(Side from, const AlignmentSnapshot& snapshot,
                       RelationInheritance& out) const;
  PathEvidence describe(TermId y1, const Type1Path& path) const;

  const KgPair* kgs_;
  const SideInfo* side_;
  InferenceParams params_;
};

}  // namespace nala
