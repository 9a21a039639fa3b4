#include "nala/kg.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

namespace nala {

std::string_view to_string(TermKind kind) {
  switch (kind) {
    case TermKind::kEntity: return "entity";
    case TermKind::kRelation: return "relation";
    case TermKind::kAttribute: return "attribute";
    case TermKind::kLiteral: return "literal";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// TermRegistry

std::string TermRegistry::key(Side side, TermKind kind, std::string_view name) {
  std::string k;
  k.reserve(name.size() + 3);
  k.push_back(static_cast<char>('0' + static_cast<int>(side)));
  // Relations and attributes share one namespace per side.
  const bool relational = kind == TermKind::kRelation || kind == TermKind::kAttribute;
  k.push_back(relational ? 'r' : kind == TermKind::kEntity ? 'e' : 'l');
  k.push_back('|');
  k.append(name);
  return k;
}

TermId TermRegistry::add(std::string name, TermKind kind, Side side) {
  TermId id{static_cast<std::uint32_t>(terms_.size())};
  terms_.push_back(TermInfo{std::move(name), kind, side, TermId{}, false});
  return id;
}

TermId TermRegistry::intern_entity(Side side, std::string_view name) {
  auto [it, inserted] = lookup_.try_emplace(key(side, TermKind::kEntity, name));
  if (inserted) it->second = add(std::string(name), TermKind::kEntity, side);
  return it->second;
}

TermId TermRegistry::intern_relation(Side side, std::string_view name, bool is_attribute) {
  const TermKind kind = is_attribute ? TermKind::kAttribute : TermKind::kRelation;
  auto [it, inserted] = lookup_.try_emplace(key(side, kind, name));
  if (!inserted) {
    if (terms_[it->second.value].kind != kind) {
      throw LoadError("term '" + std::string(name) + "' used both as relation and attribute");
    }
    return it->second;
  }
  const TermId forward = add(std::string(name), kind, side);
  const TermId backward = add(std::string(name), kind, side);
  terms_[forward.value].reversed_of = backward;
  terms_[backward.value].reversed_of = forward;
  terms_[backward.value].is_reversed = true;
  it->second = forward;
  return forward;
}

TermId TermRegistry::intern_literal(std::string_view text) {
  auto [it, inserted] = lookup_.try_emplace(key(Side::kShared, TermKind::kLiteral, text));
  if (inserted) it->second = add(std::string(text), TermKind::kLiteral, Side::kShared);
  return it->second;
}

std::optional<TermId> TermRegistry::find_entity(Side side, std::string_view name) const {
  auto it = lookup_.find(key(side, TermKind::kEntity, name));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<TermId> TermRegistry::find_relation(Side side, std::string_view name) const {
  auto it = lookup_.find(key(side, TermKind::kRelation, name));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<TermId> TermRegistry::find_literal(std::string_view text) const {
  auto it = lookup_.find(key(Side::kShared, TermKind::kLiteral, text));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

TermId TermRegistry::reversed(TermId rel) const {
  const TermInfo& t = info(rel);
  if (!t.reversed_of.valid()) {
    throw std::invalid_argument("term has no reverse: " + t.name);
  }
  return t.reversed_of;
}

std::string TermRegistry::display(TermId id) const {
  const TermInfo& t = info(id);
  return t.is_reversed ? t.name + "^-1" : t.name;
}

// ---------------------------------------------------------------------------
// KnowledgeGraph

void KnowledgeGraph::note_term(TermId id) {
  if (present_.size() <= id.value) present_.resize(id.value + 1, 0);
  const TermKind kind = terms_->kind(id);
  if (kind == TermKind::kEntity && present_[id.value] == 0) {
    present_[id.value] = 1;
    entities_.push_back(id);
  } else if (kind == TermKind::kLiteral && present_[id.value] == 0) {
    present_[id.value] = 2;
    literals_.push_back(id);
  }
}

bool KnowledgeGraph::add_triple(TermId head, TermId rel, TermId tail, bool is_attribute) {
  const TermInfo& r = terms_->info(rel);
  if (r.is_reversed) return add_triple(tail, r.reversed_of, head, is_attribute);
  auto& rels = pairs_[pack(head, tail)];
  if (std::find(rels.begin(), rels.end(), rel) != rels.end()) return false;
  rels.push_back(rel);
  const TermId inverse = r.reversed_of;
  pairs_[pack(tail, head)].push_back(inverse);

  note_term(head);
  note_term(tail);
  if (relation_seen_.size() <= rel.value) relation_seen_.resize(rel.value + 1, 0);
  if (!relation_seen_[rel.value]) {
    relation_seen_[rel.value] = 1;
    relations_.push_back(rel);
  }

  const std::size_t need = std::max({head.value, tail.value}) + 1;
  if (in_.size() < need) {
    in_.resize(need);
    out_.resize(need);
  }
  triples_.push_back({head, rel, tail, is_attribute});
  triples_.push_back({tail, inverse, head, is_attribute});
  out_[head.value].push_back({rel, tail});
  in_[tail.value].push_back({head, rel});
  out_[tail.value].push_back({inverse, head});
  in_[head.value].push_back({tail, inverse});
  return true;
}

bool KnowledgeGraph::add_relation_triple(std::string_view head, std::string_view rel,
                                         std::string_view tail) {
  const TermId h = terms_->intern_entity(side_, head);
  const TermId r = terms_->intern_relation(side_, rel, false);
  const TermId t = terms_->intern_entity(side_, tail);
  return add_triple(h, r, t, false);
}

bool KnowledgeGraph::add_attribute_triple(std::string_view entity, std::string_view attribute,
                                          std::string_view literal) {
  const TermId h = terms_->intern_entity(side_, entity);
  const TermId a = terms_->intern_relation(side_, attribute, true);
  const TermId l = terms_->intern_literal(normalize_literal(literal));
  return add_triple(h, a, l, true);
}

void KnowledgeGraph::compute_functionality() {
  stats_.clear();
  // head -> distinct tails per relation; triples are already deduplicated so
  // each stored triple is one distinct pair.
  std::unordered_map<TermId, std::unordered_set<std::uint32_t>, TermIdHash> heads;
  for (const Triple& t : triples_) {
    auto& s = stats_[t.rel];
    s.rel = t.rel;
    ++s.n_pairs;
    heads[t.rel].insert(t.head.value);
  }
  for (auto& [rel, s] : stats_) {
    s.n_heads = heads[rel].size();
    s.functionality = static_cast<double>(s.n_heads) / static_cast<double>(s.n_pairs);
  }
}

const RelationStats& KnowledgeGraph::relation_stats(TermId rel) const {
  auto it = stats_.find(rel);
  if (it == stats_.end()) {
    throw std::invalid_argument("relation has no triples or functionality not computed: " +
                                terms_->display(rel));
  }
  return it->second;
}

double KnowledgeGraph::functionality(TermId rel) const { return relation_stats(rel).functionality; }

std::size_t KnowledgeGraph::forward_relation_triple_count() const {
  return forward_triple_count() - forward_attribute_triple_count();
}

std::size_t KnowledgeGraph::forward_attribute_triple_count() const {
  std::size_t n = 0;
  for (const Triple& t : triples_) n += t.is_attribute ? 1 : 0;
  return n / 2;
}

std::span<const InEdge> KnowledgeGraph::neighbors_in(TermId e) const { return slot(in_, e); }

std::span<const OutEdge> KnowledgeGraph::neighbors_out(TermId e) const { return slot(out_, e); }

std::span<const TermId> KnowledgeGraph::relations_between(TermId head, TermId tail) const {
  auto it = pairs_.find(pack(head, tail));
  if (it == pairs_.end()) return {};
  return it->second;
}

bool KnowledgeGraph::contains(TermId head, TermId rel, TermId tail) const {
  auto rels = relations_between(head, tail);
  return std::find(rels.begin(), rels.end(), rel) != rels.end();
}

bool KnowledgeGraph::has_entity(TermId id) const {
  return id.value < present_.size() && present_[id.value] == 1;
}

bool KnowledgeGraph::has_literal(TermId id) const {
  return id.value < present_.size() && present_[id.value] == 2;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

struct Fields {
  std::string_view a, b, c;
};

// Splits a triple line. Returns false for malformed input.
bool split_triple(std::string_view line, Fields& out) {
  const auto t1 = line.find('\t');
  if (t1 != std::string_view::npos) {
    const auto t2 = line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) return false;
    if (line.find('\t', t2 + 1) != std::string_view::npos) return false;
    out = {trim(line.substr(0, t1)), trim(line.substr(t1 + 1, t2 - t1 - 1)),
           trim(line.substr(t2 + 1))};
    return !out.a.empty() && !out.b.empty() && !out.c.empty();
  }
  // N-Triples-like fallback: <h> <r> rest [.]
  const auto s1 = line.find(' ');
  if (s1 == std::string_view::npos) return false;
  const auto s2 = line.find(' ', s1 + 1);
  if (s2 == std::string_view::npos) return false;
  std::string_view rest = trim(line.substr(s2 + 1));
  if (rest.size() >= 2 && rest.ends_with(" .")) rest = trim(rest.substr(0, rest.size() - 2));
  out = {trim(line.substr(0, s1)), trim(line.substr(s1 + 1, s2 - s1 - 1)), rest};
  return !out.a.empty() && !out.b.empty() && !out.c.empty();
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    fn(std::string_view(line), lineno);
  }
}

[[noreturn]] void malformed(const std::filesystem::path& path, std::size_t lineno) {
  throw LoadError(path.string() + ":" + std::to_string(lineno) + ": malformed line");
}

}  // namespace

std::string normalize_literal(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.size() >= 2 && s.front() == '"') {
    const auto close = s.rfind('"');
    if (close > 0) {
      const std::string_view suffix = s.substr(close + 1);
      if (suffix.empty() || suffix.starts_with("@") || suffix.starts_with("^^")) {
        s = s.substr(1, close - 1);
      }
    }
  }
  return std::string(trim(s));
}

void load_kg(KnowledgeGraph& kg, const std::filesystem::path& rel_triples,
             const std::filesystem::path& attr_triples) {
  if (!rel_triples.empty()) {
    for_each_line(rel_triples, [&](std::string_view line, std::size_t lineno) {
      Fields f;
      if (!split_triple(line, f)) malformed(rel_triples, lineno);
      kg.add_relation_triple(f.a, f.b, f.c);
    });
  }
  if (!attr_triples.empty()) {
    for_each_line(attr_triples, [&](std::string_view line, std::size_t lineno) {
      Fields f;
      if (!split_triple(line, f)) malformed(attr_triples, lineno);
      kg.add_attribute_triple(f.a, f.b, f.c);
    });
  }
  kg.compute_functionality();
}

std::vector<EntityPair> load_entity_pairs(const std::filesystem::path& path,
                                          const TermRegistry& terms) {
  std::vector<EntityPair> pairs;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) malformed(path, lineno);
    const auto a = trim(line.substr(0, tab));
    const auto b = trim(line.substr(tab + 1));
    const auto e1 = terms.find_entity(Side::kKg1, a);
    const auto e2 = terms.find_entity(Side::kKg2, b);
    if (!e1 || !e2) {
      throw LoadError(path.string() + ":" + std::to_string(lineno) + ": unknown entity '" +
                      std::string(!e1 ? a : b) + "'");
    }
    pairs.push_back({*e1, *e2});
  });
  return pairs;
}

std::vector<TermId> load_entity_list(const std::filesystem::path& path,
                                     const TermRegistry& terms, Side side) {
  std::vector<TermId> ids;
  for_each_line(path, [&](std::string_view line, std::size_t lineno) {
    const auto name = trim(line);
    const auto id = terms.find_entity(side, name);
    if (!id) {
      throw LoadError(path.string() + ":" + std::to_string(lineno) + ": unknown entity '" +
                      std::string(name) + "'");
    }
    ids.push_back(*id);
  });
  return ids;
}

void inject_seed_label_triples(KnowledgeGraph& kg1, KnowledgeGraph& kg2,
                               std::span<const EntityPair> seeds) {
  if (seeds.empty()) return;
  for (const EntityPair& p : seeds) {
    if (!kg1.has_entity(p.e1) || !kg2.has_entity(p.e2)) {
      throw std::invalid_argument("seed references an unknown entity");
    }
  }
  TermRegistry& terms = kg1.terms();
  const TermId label1 = terms.intern_relation(Side::kKg1, kSeedLabelAttribute, true);
  const TermId label2 = terms.intern_relation(Side::kKg2, kSeedLabelAttribute, true);
  for (const EntityPair& p : seeds) {
    const TermId text = terms.intern_literal(terms.name(p.e1));
    kg1.add_triple(p.e1, label1, text, true);
    kg2.add_triple(p.e2, label2, text, true);
  }
  kg1.compute_functionality();
  kg2.compute_functionality();
}

}  // namespace nala
