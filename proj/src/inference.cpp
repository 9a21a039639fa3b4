#include "nala/inference.hpp"

#include <algorithm>
#include <map>

#include "nala/parallel.hpp"

namespace nala {

namespace {

constexpr TruthValue kFact{1.0, 1.0};

std::uint64_t pack(TermId a, TermId b) {
  return (static_cast<std::uint64_t>(a.value) << 32) | b.value;
}

Side other(Side side) { return side == Side::kKg1 ? Side::kKg2 : Side::kKg1; }

bool passes_theta(const TruthValue& tv, double theta) { return tv.f >= theta && tv.c >= theta; }

// Shared by candidates() and explain() so both produce identical bits.
TruthValue fuse(const ProbabilisticRevisionPool& type1, std::span<const TruthValue> type2) {
  const std::size_t items = (type1.empty() ? 0 : 1) + type2.size();
  if (items == 0) return {0.0, 0.0};
  if (items == 1) return type1.empty() ? type2.front() : type1.result();
  RevisionPool pool;
  if (!type1.empty()) pool.add(type1.result());
  for (const TruthValue& tv : type2) pool.add(tv);
  return pool.result();
}

TruthValue type2_truth(double cosine, double c_name) {
  return {std::clamp(cosine, 0.0, 1.0), c_name};
}

std::string similarity(const TermRegistry& terms, TermId a, TermId b) {
  return terms.display(a) + " <-> " + terms.display(b);
}

std::string product(const TermRegistry& terms, TermId a, TermId b, TermId r) {
  return "(*," + terms.display(a) + "," + terms.display(b) + ") --> " + terms.display(r);
}

}  // namespace

std::string_view to_string(PathType type) {
  switch (type) {
    case PathType::kI: return "I";
    case PathType::kII: return "II";
    case PathType::kIII: return "III";
  }
  return "?";
}

Type1Chain type1_chain(const TruthValue& rel_inheritance, const TruthValue& pair_similarity,
                       double functionality) {
  Type1Chain chain;
  chain.relation_on_target = deduction(kFact, rel_inheritance);
  chain.analog_triple = analogy(kFact, pair_similarity);
  chain.functional_rule = conditional_deduction(kFact, chain.relation_on_target);
  chain.conditional = conditional_deduction(chain.functional_rule, chain.analog_triple);
  chain.conclusion = conditional_deduction(chain.conditional, TruthValue{functionality, 1.0});
  return chain;
}

TruthValue type1_truth(const TruthValue& rel_inheritance, const TruthValue& pair_similarity,
                       double functionality) {
  return type1_chain(rel_inheritance, pair_similarity, functionality).conclusion;
}

TruthValue type3_truth(const TruthValue& source_similarity, const TruthValue& target_similarity,
                       bool present, double c_absent) {
  const TruthValue moved_head = analogy(kFact, source_similarity);
  const TruthValue moved_both = analogy(moved_head, target_similarity);
  const TruthValue target_fact = present ? kFact : TruthValue{0.0, c_absent};
  return induction(target_fact, moved_both);
}

SimilaritySentence aggregate_candidate(TermId y1, TermId y2, std::span<const TruthValue> type1,
                                       std::span<const TruthValue> type2) {
  ProbabilisticRevisionPool pool;
  for (const TruthValue& tv : type1) pool.add(tv);
  return {y1, y2, fuse(pool, type2)};
}

// ---------------------------------------------------------------------------
// EntitySimilarities / RelationInheritance

void EntitySimilarities::add(TermId e1, TermId e2, const TruthValue& tv) {
  auto& fwd = forward_[e1];
  for (const ScoredPartner& p : fwd) {
    if (p.partner == e2) return;
  }
  fwd.push_back({e2, tv});
  backward_[e2].push_back({e1, tv});
  ++count_;
}

std::span<const ScoredPartner> EntitySimilarities::forward(TermId e1) const {
  auto it = forward_.find(e1);
  if (it == forward_.end()) return {};
  return it->second;
}

std::span<const ScoredPartner> EntitySimilarities::backward(TermId e2) const {
  auto it = backward_.find(e2);
  if (it == backward_.end()) return {};
  return it->second;
}

void RelationInheritance::set(TermId from, TermId to, const TruthValue& tv) {
  entries_[pack(from, to)] = tv;
}

std::optional<TruthValue> RelationInheritance::find(TermId from, TermId to) const {
  auto it = entries_.find(pack(from, to));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<RelationInheritance::Entry> RelationInheritance::entries() const {
  std::vector<Entry> out;
  out.reserve(entries_.size());
  for (const auto& [key, tv] : entries_) {
    out.push_back({TermId{static_cast<std::uint32_t>(key >> 32)},
                   TermId{static_cast<std::uint32_t>(key & 0xffffffffu)}, tv});
  }
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  return out;
}

// ---------------------------------------------------------------------------
// InferenceEngine

InferenceEngine::InferenceEngine(const KgPair& kgs, const SideInfo& side_info,
                                 InferenceParams params)
    : kgs_(&kgs), side_(&side_info), params_(params) {}

std::vector<ScoredPartner> InferenceEngine::partners(Side from, TermId x,
                                                     const AlignmentSnapshot& snapshot) const {
  std::vector<ScoredPartner> out;
  const TermKind kind = kgs_->terms.kind(x);
  if (kind == TermKind::kEntity) {
    auto list = from == Side::kKg1 ? snapshot.entities.forward(x) : snapshot.entities.backward(x);
    for (const ScoredPartner& p : list) {
      if (passes_theta(p.tv, params_.theta)) out.push_back(p);
    }
  } else if (kind == TermKind::kLiteral) {
    for (const LiteralPartner& p : side_->literal_partners(from, x)) {
      if (passes_theta(p.tv, params_.theta)) out.push_back({p.literal, p.tv});
    }
  }
  return out;
}

std::optional<TruthValue> InferenceEngine::inheritance(const AlignmentSnapshot& snapshot,
                                                       TermId from, TermId to) const {
  if (snapshot.use_default_inheritance) return TruthValue{1.0, params_.iota};
  return snapshot.inheritance.find(from, to);
}

std::vector<Type1Path> InferenceEngine::enumerate_type1(TermId y1,
                                                        const AlignmentSnapshot& snapshot,
                                                        std::optional<TermId> only) const {
  std::vector<Type1Path> paths;
  const KnowledgeGraph& kg2 = kgs_->kg2;
  for (const InEdge& in : kgs_->kg1.neighbors_in(y1)) {
    const TermId x1 = in.head;
    const TermId r1 = in.rel;
    for (const ScoredPartner& p : partners(Side::kKg1, x1, snapshot)) {
      const TermId x2 = p.partner;
      for (const OutEdge& out : kg2.neighbors_out(x2)) {
        const TermId y2 = out.tail;
        if (only && y2 != *only) continue;
        if (!kg2.has_entity(y2)) continue;
        const TermId r2 = out.rel;
        const double fun = kg2.functionality(r2);
        for (int dir = 0; dir < (params_.symmetric_type1 ? 2 : 1); ++dir) {
          const bool reverse = dir == 1;
          const auto inh = reverse ? inheritance(snapshot, r2, r1) : inheritance(snapshot, r1, r2);
          if (!inh) continue;
          const TruthValue tv = type1_truth(*inh, p.tv, fun);
          if (tv.c <= 0.0) continue;
          paths.push_back({x1, r1, x2, r2, y2, reverse, *inh, p.tv, fun, tv});
        }
      }
    }
  }
  return paths;
}

std::vector<std::pair<TermId, TruthValue>> InferenceEngine::infer_type1(
    TermId y1, const AlignmentSnapshot& snapshot) const {
  std::vector<TermId> order;
  std::unordered_map<TermId, ProbabilisticRevisionPool, TermIdHash> pools;
  for (const Type1Path& path : enumerate_type1(y1, snapshot)) {
    auto [it, inserted] = pools.try_emplace(path.y2);
    if (inserted) order.push_back(path.y2);
    it->second.add(path.conclusion);
  }
  std::vector<std::pair<TermId, TruthValue>> out;
  out.reserve(order.size());
  for (TermId y2 : order) out.emplace_back(y2, pools[y2].result());
  return out;
}

std::vector<Type2Sentence> InferenceEngine::infer_type2(TermId y1) const {
  std::vector<Type2Sentence> out;
  for (Channel ch : kNameChannels) {
    const double c_name = params_.c_name[static_cast<std::size_t>(ch)];
    if (c_name <= 0.0) continue;
    for (const auto& [y2, cos] : side_->name_scores(ch, y1)) {
      out.push_back({y2, ch, cos, type2_truth(cos, c_name)});
    }
  }
  return out;
}

std::vector<SimilaritySentence> InferenceEngine::candidates(
    TermId y1, const AlignmentSnapshot& snapshot) const {
  struct Slot {
    TermId y2;
    ProbabilisticRevisionPool type1;
    std::vector<TruthValue> type2;
  };
  std::vector<Slot> slots;
  std::unordered_map<TermId, std::size_t, TermIdHash> index;
  auto slot_for = [&](TermId y2) -> Slot& {
    auto [it, inserted] = index.try_emplace(y2, slots.size());
    if (inserted) slots.push_back({y2, {}, {}});
    return slots[it->second];
  };

  for (const Type1Path& path : enumerate_type1(y1, snapshot)) {
    slot_for(path.y2).type1.add(path.conclusion);
  }
  // Channels are visited in a fixed order so each slot's type II list
  // matches the order explain() uses.
  for (const Type2Sentence& s : infer_type2(y1)) slot_for(s.y2).type2.push_back(s.tv);

  std::vector<SimilaritySentence> out;
  out.reserve(slots.size());
  for (const Slot& slot : slots) {
    const TruthValue tv = fuse(slot.type1, slot.type2);
    if (tv.expectation() > 0.0) out.push_back({y1, slot.y2, tv});
  }
  return out;
}

PathEvidence InferenceEngine::describe(TermId y1, const Type1Path& path) const {
  const TermRegistry& terms = kgs_->terms;
  const TermId from = path.reverse_direction ? path.r2 : path.r1;
  const TermId to = path.reverse_direction ? path.r1 : path.r2;
  PathEvidence ev;
  ev.type = PathType::kI;
  ev.premises = {
      {product(terms, path.x1, y1, path.r1), kFact},
      {terms.display(from) + " --> " + terms.display(to), path.inheritance},
      {product(terms, path.x2, path.y2, path.r2), kFact},
      {similarity(terms, path.x1, path.x2), path.pair_similarity},
      {"((*,#a,$b) --> #r && (*,#a,$c) --> #r && #r --> [fun]) ==> $b <-> $c", kFact},
      {terms.display(path.r2) + " --> [fun]", {path.functionality, 1.0}},
  };
  ev.conclusion = path.conclusion;
  return ev;
}

Explanation InferenceEngine::explain(TermId y1, TermId y2,
                                     const AlignmentSnapshot& snapshot) const {
  Explanation out;
  ProbabilisticRevisionPool type1;
  for (const Type1Path& path : enumerate_type1(y1, snapshot, y2)) {
    type1.add(path.conclusion);
    out.paths.push_back(describe(y1, path));
  }
  std::vector<TruthValue> type2;
  for (Channel ch : kNameChannels) {
    const double c_name = params_.c_name[static_cast<std::size_t>(ch)];
    if (c_name <= 0.0) continue;
    const auto cos = side_->name_similarity(ch, y1, y2);
    if (!cos) continue;
    const TruthValue tv = type2_truth(*cos, c_name);
    type2.push_back(tv);
    PathEvidence ev;
    ev.type = PathType::kII;
    ev.premises = {{"sim(" + std::string(to_string(ch)) + "(" + kgs_->terms.display(y1) + "), " +
                        std::string(to_string(ch)) + "(" + kgs_->terms.display(y2) + "))",
                    {std::clamp(*cos, 0.0, 1.0), c_name}}};
    ev.conclusion = tv;
    out.paths.push_back(std::move(ev));
  }
  out.sentence = {y1, y2, fuse(type1, type2)};
  return out;
}

void InferenceEngine::type3_direction(Side from, const AlignmentSnapshot& snapshot,
                                      RelationInheritance& out) const {
  const KnowledgeGraph& source = kgs_->graph(from);
  const KnowledgeGraph& target = kgs_->graph(other(from));
  const auto triples = source.triples();
  constexpr std::size_t kChunk = 2048;
  const std::size_t n_chunks = (triples.size() + kChunk - 1) / kChunk;

  // Calls fn(r1, x2, y2, moved) for every aligned skeleton of the chunk.
  auto for_each_skeleton = [&](std::size_t chunk, auto&& fn) {
    const std::size_t end = std::min(triples.size(), (chunk + 1) * kChunk);
    for (std::size_t i = chunk * kChunk; i < end; ++i) {
      const Triple& t = triples[i];
      const auto heads = partners(from, t.head, snapshot);
      if (heads.empty()) continue;
      const auto tails = partners(from, t.tail, snapshot);
      for (const ScoredPartner& h : heads) {
        for (const ScoredPartner& tl : tails) {
          fn(t.rel, h.partner, tl.partner, h.tv, tl.tv);
        }
      }
    }
  };

  using EvidenceMap = std::unordered_map<std::uint64_t, Evidence>;
  auto merge = [](std::vector<EvidenceMap>& parts, std::map<std::uint64_t, Evidence>& into) {
    for (EvidenceMap& part : parts) {
      // Sort keys so the floating-point summation order is fixed.
      std::vector<std::pair<std::uint64_t, Evidence>> sorted(part.begin(), part.end());
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [key, ev] : sorted) {
        Evidence& acc = into[key];
        acc.positive += ev.positive;
        acc.total += ev.total;
      }
    }
  };

  // Positive versions: (x2, r2, y2) present in the target graph.
  std::vector<EvidenceMap> positive(n_chunks);
  parallel_for(n_chunks, params_.threads, [&](std::size_t chunk) {
    for_each_skeleton(chunk, [&](TermId r1, TermId x2, TermId y2, const TruthValue& t13,
                                 const TruthValue& t15) {
      const auto present = target.relations_between(x2, y2);
      if (present.empty()) return;
      const Evidence ev = induction_evidence(kFact, analogy(analogy(kFact, t13), t15));
      if (ev.total <= 0.0) return;
      for (TermId r2 : present) {
        Evidence& acc = positive[chunk][pack(r1, r2)];
        acc.positive += ev.positive;
        acc.total += ev.total;
      }
    });
  });
  std::map<std::uint64_t, Evidence> pooled;
  merge(positive, pooled);
  positive.clear();

  // Negative versions only for relation pairs with at least one positive
  // instance.
  std::unordered_map<TermId, std::vector<TermId>, TermIdHash> counterparts;
  for (const auto& [key, ev] : pooled) {
    counterparts[TermId{static_cast<std::uint32_t>(key >> 32)}].push_back(
        TermId{static_cast<std::uint32_t>(key & 0xffffffffu)});
  }
  const TruthValue absent{0.0, params_.c_absent};
  std::vector<EvidenceMap> negative(n_chunks);
  if (params_.c_absent > 0.0) {
    parallel_for(n_chunks, params_.threads, [&](std::size_t chunk) {
      for_each_skeleton(chunk, [&](TermId r1, TermId x2, TermId y2, const TruthValue& t13,
                                   const TruthValue& t15) {
        auto it = counterparts.find(r1);
        if (it == counterparts.end()) return;
        const Evidence ev = induction_evidence(absent, analogy(analogy(kFact, t13), t15));
        if (ev.total <= 0.0) return;
        const auto present = target.relations_between(x2, y2);
        for (TermId r2 : it->second) {
          if (std::find(present.begin(), present.end(), r2) != present.end()) continue;
          Evidence& acc = negative[chunk][pack(r1, r2)];
          acc.positive += ev.positive;
          acc.total += ev.total;
        }
      });
    });
    merge(negative, pooled);
  }

  for (const auto& [key, ev] : pooled) {
    out.set(TermId{static_cast<std::uint32_t>(key >> 32)},
            TermId{static_cast<std::uint32_t>(key & 0xffffffffu)},
            truth_from_evidence({std::min(ev.positive, ev.total), ev.total}));
  }
}

RelationInheritance InferenceEngine::infer_type3(const AlignmentSnapshot& snapshot) const {
  RelationInheritance out;
  type3_direction(Side::kKg1, snapshot, out);
  type3_direction(Side::kKg2, snapshot, out);
  return out;
}

}  // namespace nala
