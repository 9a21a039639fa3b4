#pragma once
// Embedding-derived side information: per-channel entity vectors, the value
// channel for literals, and the top-K_value literal similarity index.

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nala/kg.hpp"
#include "nala/truth.hpp"

namespace nala {

enum class Channel : std::uint8_t { kName = 0, kNameTranslated = 1, kDescription = 2, kValue = 3 };

inline constexpr std::array<Channel, 3> kNameChannels = {Channel::kName, Channel::kNameTranslated,
                                                         Channel::kDescription};

std::string_view to_string(Channel channel);

// Row-major table of unit vectors keyed by term id.
class EmbeddingTable {
 public:
  EmbeddingTable(Channel channel, std::size_t dim) : channel_(channel), dim_(dim) {}

  // File format: "#dim=N" on the first line, then "id<TAB>v1 v2 ... vN".
  // Entity channels resolve ids against the entities of `kg`; the value
  // channel resolves against its literals.
  static EmbeddingTable load(const std::filesystem::path& path, Channel channel,
                             const KnowledgeGraph& kg);

  // Normalizes and stores v. Throws DomainError for zero or non-finite input.
  void add(TermId id, std::span<const float> v);

  Channel channel() const { return channel_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<TermId>& ids() const { return ids_; }
  std::optional<std::span<const float>> find(TermId id) const;
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  const std::vector<float>& data() const { return data_; }

 private:
  Channel channel_;
  std::size_t dim_;
  std::vector<TermId> ids_;
  std::vector<float> data_;
  std::unordered_map<TermId, std::size_t, TermIdHash> rows_;
};

double cosine(std::span<const float> a, std::span<const float> b);

struct ValueNeighbor {
  TermId literal;
  double cosine;
};

// For each literal of one graph, the K_value most similar non-identical
// literals of the other graph, sorted by descending cosine (ties by id).
class ValueSimilarityIndex {
 public:
  static ValueSimilarityIndex build(const EmbeddingTable& from, const EmbeddingTable& to,
                                    std::size_t k_value);

  std::span<const ValueNeighbor> neighbors(TermId literal) const;
  std::size_t size() const { return lists_.size(); }

 private:
  std::unordered_map<TermId, std::vector<ValueNeighbor>, TermIdHash> lists_;
};

// A bridge partner for a literal: the partner literal and the truth
// value of the literal similarity.
struct LiteralPartner {
  TermId literal;
  TruthValue tv;
};

class SideInfo {
 public:
  explicit SideInfo(const KgPair& kgs) : kgs_(&kgs) {}

  void set_table(Side side, EmbeddingTable table);
  const EmbeddingTable* table(Side side, Channel channel) const;
  bool has_channel(Channel channel) const;

  // Builds both directions of the value index from the value tables.
  void build_value_index(std::size_t k_value);

  // Cosine of the stored vectors; nullopt when either side is not embedded.
  std::optional<double> name_similarity(Channel channel, TermId y1, TermId y2) const;

  // Cosine of y1 (KG1) against every embedded KG2 entity, in table order.
  std::vector<std::pair<TermId, double>> name_scores(Channel channel, TermId y1) const;

  // x is a literal of graph `from`, y a literal of the other graph.
  // Identical -> <1,1>; indexed with cosine s > 0 -> <s,s>; else nullopt.
  std::optional<TruthValue> literal_similarity(Side from, TermId x, TermId y) const;

  // All y with literal_similarity(from, x, y) defined.
  std::vector<LiteralPartner> literal_partners(Side from, TermId x) const;

 private:
  const KgPair* kgs_;
  std::array<std::array<std::optional<EmbeddingTable>, 4>, 2> tables_;
  std::optional<ValueSimilarityIndex> value_index_[2];
};

}  // namespace nala
