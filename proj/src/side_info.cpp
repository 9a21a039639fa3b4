#include "nala/side_info.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

namespace nala {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_matrix(const EmbeddingTable& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(t.dim())};
}

bool better(const ValueNeighbor& a, const ValueNeighbor& b) {
  if (a.cosine != b.cosine) return a.cosine > b.cosine;
  return a.literal < b.literal;
}

std::size_t side_index(Side side) { return side == Side::kKg1 ? 0 : 1; }

Side other(Side side) { return side == Side::kKg1 ? Side::kKg2 : Side::kKg1; }

}  // namespace

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::kName: return "name";
    case Channel::kNameTranslated: return "name_translated";
    case Channel::kDescription: return "description";
    case Channel::kValue: return "value";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// EmbeddingTable

void EmbeddingTable::add(TermId id, std::span<const float> v) {
  if (v.size() != dim_) throw DomainError("embedding dimension mismatch");
  double norm2 = 0.0;
  for (float x : v) {
    if (!std::isfinite(x)) throw DomainError("non-finite embedding value");
    norm2 += static_cast<double>(x) * x;
  }
  if (!(norm2 > 0.0)) throw DomainError("non-normalizable embedding (zero vector)");
  if (rows_.contains(id)) throw DomainError("duplicate embedding id");
  const double inv = 1.0 / std::sqrt(norm2);
  rows_.emplace(id, ids_.size());
  ids_.push_back(id);
  for (float x : v) data_.push_back(static_cast<float>(x * inv));
}

std::optional<std::span<const float>> EmbeddingTable::find(TermId id) const {
  auto it = rows_.find(id);
  if (it == rows_.end()) return std::nullopt;
  return row(it->second);
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path, Channel channel,
                                    const KnowledgeGraph& kg) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  auto fail = [&](std::size_t lineno, const std::string& what) -> LoadError {
    return LoadError(path.string() + ":" + std::to_string(lineno) + ": " + what);
  };

  std::string line;
  if (!std::getline(in, line) || !line.starts_with("#dim=")) {
    throw fail(1, "missing '#dim=<N>' header");
  }
  std::size_t dim = 0;
  {
    const char* b = line.data() + 5;
    const char* e = line.data() + line.size();
    while (e > b && (e[-1] == '\r' || e[-1] == ' ')) --e;
    auto [p, ec] = std::from_chars(b, e, dim);
    if (ec != std::errc() || p != e || dim == 0) throw fail(1, "bad dimension header");
  }

  EmbeddingTable table(channel, dim);
  const TermRegistry& terms = kg.terms();
  std::vector<float> v;
  v.reserve(dim);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw fail(lineno, "expected id<TAB>vector");
    const std::string_view name(line.data(), tab);

    std::optional<TermId> id;
    if (channel == Channel::kValue) {
      id = terms.find_literal(normalize_literal(name));
      if (id && !kg.has_literal(*id)) id.reset();
    } else {
      id = terms.find_entity(kg.side(), name);
    }
    if (!id) throw fail(lineno, "unknown id '" + std::string(name) + "'");

    v.clear();
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p == end) break;
      // from_chars for float is available in libstdc++ 11.
      float x = 0.0f;
      auto [q, ec] = std::from_chars(p, end, x);
      if (ec != std::errc()) throw fail(lineno, "bad number");
      v.push_back(x);
      p = q;
    }
    if (v.size() != dim) {
      throw fail(lineno, "dimension mismatch: expected " + std::to_string(dim) + ", got " +
                             std::to_string(v.size()));
    }
    try {
      table.add(*id, v);
    } catch (const DomainError& e) {
      throw fail(lineno, e.what());
    }
  }
  return table;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) dot += static_cast<double>(a[i]) * b[i];
  return std::clamp(dot, -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// ValueSimilarityIndex

ValueSimilarityIndex ValueSimilarityIndex::build(const EmbeddingTable& from,
                                                 const EmbeddingTable& to, std::size_t k_value) {
  if (from.dim() != to.dim()) throw DomainError("value tables have different dimensions");
  ValueSimilarityIndex index;
  if (k_value == 0 || from.size() == 0 || to.size() == 0) return index;

  const auto a = as_matrix(from);
  const auto b = as_matrix(to);
  constexpr Eigen::Index kBlock = 512;
  std::vector<ValueNeighbor> scratch;
  for (Eigen::Index start = 0; start < a.rows(); start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, a.rows() - start);
    const RowMatrix scores = a.middleRows(start, rows) * b.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const TermId self = from.ids()[start + r];
      scratch.clear();
      for (Eigen::Index c = 0; c < scores.cols(); ++c) {
        const TermId id = to.ids()[c];
        if (id == self) continue;
        scratch.push_back({id, std::clamp(static_cast<double>(scores(r, c)), -1.0, 1.0)});
      }
      const std::size_t k = std::min(k_value, scratch.size());
      std::partial_sort(scratch.begin(), scratch.begin() + k, scratch.end(), better);
      index.lists_.emplace(self, std::vector<ValueNeighbor>(scratch.begin(), scratch.begin() + k));
    }
  }
  return index;
}

std::span<const ValueNeighbor> ValueSimilarityIndex::neighbors(TermId literal) const {
  auto it = lists_.find(literal);
  if (it == lists_.end()) return {};
  return it->second;
}

// ---------------------------------------------------------------------------
// SideInfo

void SideInfo::set_table(Side side, EmbeddingTable table) {
  const auto ch = static_cast<std::size_t>(table.channel());
  auto& slot = tables_[side_index(side)];
  const auto& twin = tables_[1 - side_index(side)][ch];
  if (twin && twin->dim() != table.dim()) {
    throw DomainError("embedding dimension differs between graphs for channel " +
                      std::string(to_string(table.channel())));
  }
  slot[ch] = std::move(table);
}

const EmbeddingTable* SideInfo::table(Side side, Channel channel) const {
  const auto& t = tables_[side_index(side)][static_cast<std::size_t>(channel)];
  return t ? &*t : nullptr;
}

bool SideInfo::has_channel(Channel channel) const {
  return table(Side::kKg1, channel) != nullptr && table(Side::kKg2, channel) != nullptr;
}

void SideInfo::build_value_index(std::size_t k_value) {
  const EmbeddingTable* t1 = table(Side::kKg1, Channel::kValue);
  const EmbeddingTable* t2 = table(Side::kKg2, Channel::kValue);
  if (!t1 || !t2) {
    value_index_[0].reset();
    value_index_[1].reset();
    return;
  }
  value_index_[0] = ValueSimilarityIndex::build(*t1, *t2, k_value);
  value_index_[1] = ValueSimilarityIndex::build(*t2, *t1, k_value);
}

std::optional<double> SideInfo::name_similarity(Channel channel, TermId y1, TermId y2) const {
  const EmbeddingTable* t1 = table(Side::kKg1, channel);
  const EmbeddingTable* t2 = table(Side::kKg2, channel);
  if (!t1 || !t2) return std::nullopt;
  auto a = t1->find(y1);
  auto b = t2->find(y2);
  if (!a || !b) return std::nullopt;
  return cosine(*a, *b);
}

std::vector<std::pair<TermId, double>> SideInfo::name_scores(Channel channel, TermId y1) const {
  std::vector<std::pair<TermId, double>> out;
  const EmbeddingTable* t1 = table(Side::kKg1, channel);
  const EmbeddingTable* t2 = table(Side::kKg2, channel);
  if (!t1 || !t2) return out;
  auto a = t1->find(y1);
  if (!a) return out;
  out.reserve(t2->size());
  for (std::size_t i = 0; i < t2->size(); ++i) {
    out.emplace_back(t2->ids()[i], cosine(*a, t2->row(i)));
  }
  return out;
}

std::optional<TruthValue> SideInfo::literal_similarity(Side from, TermId x, TermId y) const {
  if (x == y) {
    if (kgs_->graph(other(from)).has_literal(y)) return TruthValue{1.0, 1.0};
    return std::nullopt;
  }
  const auto& index = value_index_[side_index(from)];
  if (!index) return std::nullopt;
  for (const ValueNeighbor& n : index->neighbors(x)) {
    if (n.literal == y) {
      if (n.cosine > 0.0) return TruthValue{n.cosine, n.cosine};
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::vector<LiteralPartner> SideInfo::literal_partners(Side from, TermId x) const {
  std::vector<LiteralPartner> out;
  if (kgs_->graph(other(from)).has_literal(x)) out.push_back({x, {1.0, 1.0}});
  const auto& index = value_index_[side_index(from)];
  if (index) {
    for (const ValueNeighbor& n : index->neighbors(x)) {
      if (n.cosine > 0.0) out.push_back({n.literal, {n.cosine, n.cosine}});
    }
  }
  return out;
}

}  // namespace nala
