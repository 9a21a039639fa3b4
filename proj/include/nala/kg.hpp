#pragma once
// Knowledge-graph storage: interned terms, triples with reversed duplicates,
// head/tail/pair indexes, and per-relation functionality.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace nala {

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TermId {
  std::uint32_t value = kInvalid;

  static constexpr std::uint32_t kInvalid = 0xffffffffu;

  bool valid() const { return value != kInvalid; }
  friend auto operator<=>(const TermId&, const TermId&) = default;
};

struct TermIdHash {
  std::size_t operator()(TermId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

enum class TermKind : std::uint8_t { kEntity, kRelation, kAttribute, kLiteral };

// Literals live in a registry shared by both graphs.
enum class Side : std::uint8_t { kKg1 = 0, kKg2 = 1, kShared = 2 };

std::string_view to_string(TermKind kind);

struct TermInfo {
  std::string name;
  TermKind kind;
  Side side;
  TermId reversed_of;  // set for relation / attribute terms only
  bool is_reversed = false;
};

// Interns every term of both graphs. Entity, relation and attribute names
// are qualified by side; literals are shared so identical strings in the
// two graphs get one id.
class TermRegistry {
 public:
  TermId intern_entity(Side side, std::string_view name);
  // Interns r and r^-1 together and returns r.
  TermId intern_relation(Side side, std::string_view name, bool is_attribute);
  TermId intern_literal(std::string_view text);

  std::optional<TermId> find_entity(Side side, std::string_view name) const;
  std::optional<TermId> find_relation(Side side, std::string_view name) const;
  std::optional<TermId> find_literal(std::string_view text) const;

  const TermInfo& info(TermId id) const { return terms_.at(id.value); }
  const std::string& name(TermId id) const { return info(id).name; }
  TermKind kind(TermId id) const { return info(id).kind; }
  TermId reversed(TermId rel) const;
  // "r" for forward terms, "r^-1" for reversed ones.
  std::string display(TermId id) const;
  std::size_t size() const { return terms_.size(); }

 private:
  static std::string key(Side side, TermKind kind, std::string_view name);
  TermId add(std::string name, TermKind kind, Side side);

  std::vector<TermInfo> terms_;
  std::unordered_map<std::string, TermId> lookup_;
};

struct Triple {
  TermId head;
  TermId rel;
  TermId tail;
  bool is_attribute = false;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct RelationStats {
  TermId rel;
  double functionality = 0.0;
  std::size_t n_heads = 0;
  std::size_t n_pairs = 0;
};

struct InEdge {
  TermId head;
  TermId rel;
};

struct OutEdge {
  TermId rel;
  TermId tail;
};

// One side of the alignment problem. Triples are stored together with their
// reversed duplicates; indexes always mirror the triple set.
class KnowledgeGraph {
 public:
  KnowledgeGraph(TermRegistry& terms, Side side) : terms_(&terms), side_(side) {}

  Side side() const { return side_; }
  const TermRegistry& terms() const { return *terms_; }
  TermRegistry& terms() { return *terms_; }

  // Adds (head, rel, tail) and (tail, rel^-1, head). Returns false for a
  // duplicate.
  bool add_relation_triple(std::string_view head, std::string_view rel, std::string_view tail);
  bool add_attribute_triple(std::string_view entity, std::string_view attribute,
                            std::string_view literal);
  bool add_triple(TermId head, TermId rel, TermId tail, bool is_attribute);

  // Counts functionality for every relation and attribute, both directions.
  void compute_functionality();
  double functionality(TermId rel) const;
  const RelationStats& relation_stats(TermId rel) const;

  std::span<const Triple> triples() const { return triples_; }
  std::size_t forward_triple_count() const { return triples_.size() / 2; }
  std::size_t forward_relation_triple_count() const;
  std::size_t forward_attribute_triple_count() const;

  // Triples (head, rel, e).
  std::span<const InEdge> neighbors_in(TermId e) const;
  // Triples (e, rel, tail).
  std::span<const OutEdge> neighbors_out(TermId e) const;
  // Relations r with (head, r, tail) in the graph.
  std::span<const TermId> relations_between(TermId head, TermId tail) const;
  bool contains(TermId head, TermId rel, TermId tail) const;

  const std::vector<TermId>& entities() const { return entities_; }
  const std::vector<TermId>& literals() const { return literals_; }
  // Forward relations and attributes in first-seen order.
  const std::vector<TermId>& relations() const { return relations_; }
  bool has_entity(TermId id) const;
  bool has_literal(TermId id) const;

 private:
  void note_term(TermId id);
  static std::uint64_t pack(TermId a, TermId b) {
    return (static_cast<std::uint64_t>(a.value) << 32) | b.value;
  }
  template <typename T>
  static std::span<const T> slot(const std::vector<std::vector<T>>& index, TermId id) {
    if (id.value >= index.size()) return {};
    return index[id.value];
  }

  TermRegistry* terms_;
  Side side_;
  std::vector<Triple> triples_;
  std::vector<std::vector<InEdge>> in_;
  std::vector<std::vector<OutEdge>> out_;
  std::unordered_map<std::uint64_t, std::vector<TermId>> pairs_;
  std::vector<std::uint8_t> present_;  // per term id: 1 entity, 2 literal
  std::vector<TermId> entities_;
  std::vector<TermId> literals_;
  std::vector<TermId> relations_;
  std::vector<std::uint8_t> relation_seen_;
  std::unordered_map<TermId, RelationStats, TermIdHash> stats_;
};

// Trims whitespace, surrounding quotes, a trailing language tag ("..."@en)
// and a trailing datatype ("..."^^<type>).
std::string normalize_literal(std::string_view raw);

// Relation-triple and attribute-triple files: head<TAB>rel<TAB>tail per line.
// Either path may be empty. Lines without a tab are read as
// "<head> <rel> tail [.]".
void load_kg(KnowledgeGraph& kg, const std::filesystem::path& rel_triples,
             const std::filesystem::path& attr_triples);

struct EntityPair {
  TermId e1;
  TermId e2;
  friend bool operator==(const EntityPair&, const EntityPair&) = default;
};

// e1<TAB>e2 per line. Unknown URIs raise LoadError.
std::vector<EntityPair> load_entity_pairs(const std::filesystem::path& path,
                                          const TermRegistry& terms);
// One entity URI per line.
std::vector<TermId> load_entity_list(const std::filesystem::path& path,
                                     const TermRegistry& terms, Side side);

inline constexpr std::string_view kSeedLabelAttribute = "EA:label";

// For each seed (x1, x2) adds (x1, EA:label, name(x1)) to kg1 and
// (x2, EA:label, name(x1)) to kg2, with reversed duplicates, then
// recomputes functionality of both graphs.
void inject_seed_label_triples(KnowledgeGraph& kg1, KnowledgeGraph& kg2,
                               std::span<const EntityPair> seeds);

// Both graphs plus the shared registry.
struct KgPair {
  TermRegistry terms;
  KnowledgeGraph kg1{terms, Side::kKg1};
  KnowledgeGraph kg2{terms, Side::kKg2};

  KgPair() = default;
  KgPair(const KgPair&) = delete;
  KgPair& operator=(const KgPair&) = delete;

  const KnowledgeGraph& graph(Side side) const { return side == Side::kKg1 ? kg1 : kg2; }
};

}  // namespace nala
