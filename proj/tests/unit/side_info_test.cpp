#include "nala/side_info.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

namespace fs = std::filesystem;
using nala::Channel;
using nala::Side;
using nala::TermId;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "nala_side_info_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

// Two graphs with entities a,b (KG1) and x,y (KG2) and literals on each.
struct Fixture {
  nala::KgPair kgs;
  Fixture() {
    kgs.kg1.add_relation_triple("a", "r", "b");
    kgs.kg2.add_relation_triple("x", "r", "y");
    for (const char* lit : {"red", "green", "blue"}) kgs.kg1.add_attribute_triple("a", "color", lit);
    for (const char* lit : {"red", "crimson", "navy"}) kgs.kg2.add_attribute_triple("x", "color", lit);
    kgs.kg1.compute_functionality();
    kgs.kg2.compute_functionality();
  }
  TermId e(Side s, const char* n) const { return *kgs.terms.find_entity(s, n); }
  TermId lit(const char* n) const { return *kgs.terms.find_literal(n); }
};

}  // namespace

TEST(EmbeddingFile, LoadsAndNormalizes) {
  Fixture fx;
  const auto path = write_temp("names1.emb", "#dim=3\na\t3 0 4\nb\t0 2 0\n");
  const auto table = nala::EmbeddingTable::load(path, Channel::kName, fx.kgs.kg1);
  EXPECT_EQ(table.size(), 2u);
  EXPECT_EQ(table.dim(), 3u);
  const auto row = *table.find(fx.e(Side::kKg1, "a"));
  EXPECT_NEAR(row[0], 0.6f, 1e-6);
  EXPECT_NEAR(row[2], 0.8f, 1e-6);
  for (std::size_t i = 0; i < table.size(); ++i) {
    double n2 = 0.0;
    for (float x : table.row(i)) n2 += static_cast<double>(x) * x;
    EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-6);
  }
}

TEST(EmbeddingFile, Errors) {
  Fixture fx;
  auto load = [&](const char* name, const char* text) {
    return nala::EmbeddingTable::load(write_temp(name, text), Channel::kName, fx.kgs.kg1);
  };
  EXPECT_THROW(load("zero.emb", "#dim=2\na\t0 0\n"), nala::LoadError);
  EXPECT_THROW(load("nohdr.emb", "a\t1 0\n"), nala::LoadError);
  EXPECT_THROW(load("dim.emb", "#dim=3\na\t1 0\n"), nala::LoadError);
  EXPECT_THROW(load("unknown.emb", "#dim=2\nzzz\t1 0\n"), nala::LoadError);
  EXPECT_THROW(load("nan.emb", "#dim=2\na\tnan 1\n"), nala::LoadError);
  try {
    load("line.emb", "#dim=2\na\t1 0\nb\t0 0\n");
    FAIL();
  } catch (const nala::LoadError& err) {
    EXPECT_NE(std::string(err.what()).find(":3:"), std::string::npos) << err.what();
  }
}

TEST(EmbeddingFile, ValueChannelResolvesLiterals) {
  Fixture fx;
  const auto path = write_temp("values1.emb", "#dim=2\nred\t1 0\n\"green\"@en\t0 1\n");
  const auto table = nala::EmbeddingTable::load(path, Channel::kValue, fx.kgs.kg1);
  EXPECT_TRUE(table.find(fx.lit("red")));
  EXPECT_TRUE(table.find(fx.lit("green")));
}

TEST(Cosine, Examples) {
  const std::vector<float> a{1, 0}, b{0.6f, 0.8f}, c{0, 1};
  EXPECT_NEAR(nala::cosine(a, a), 1.0, 1e-12);
  EXPECT_NEAR(nala::cosine(a, c), 0.0, 1e-12);
  EXPECT_NEAR(nala::cosine(a, b), 0.6, 1e-7);
  EXPECT_EQ(nala::cosine(a, b), nala::cosine(b, a));
}

TEST(NameSimilarity, AbsentWhenNotEmbedded) {
  Fixture fx;
  nala::SideInfo side(fx.kgs);
  nala::EmbeddingTable t1(Channel::kName, 2), t2(Channel::kName, 2);
  t1.add(fx.e(Side::kKg1, "a"), std::vector<float>{1, 0});
  t2.add(fx.e(Side::kKg2, "x"), std::vector<float>{0.6f, 0.8f});
  side.set_table(Side::kKg1, std::move(t1));
  side.set_table(Side::kKg2, std::move(t2));
  EXPECT_NEAR(*side.name_similarity(Channel::kName, fx.e(Side::kKg1, "a"), fx.e(Side::kKg2, "x")),
              0.6, 1e-7);
  EXPECT_FALSE(side.name_similarity(Channel::kName, fx.e(Side::kKg1, "b"), fx.e(Side::kKg2, "x")));
  EXPECT_FALSE(side.name_similarity(Channel::kDescription, fx.e(Side::kKg1, "a"),
                                    fx.e(Side::kKg2, "x")));
  const auto scores = side.name_scores(Channel::kName, fx.e(Side::kKg1, "a"));
  ASSERT_EQ(scores.size(), 1u);
  EXPECT_EQ(scores[0].first, fx.e(Side::kKg2, "x"));
}

TEST(LiteralSimilarity, IdenticalIndexedAndMissing) {
  Fixture fx;
  nala::SideInfo side(fx.kgs);
  nala::EmbeddingTable v1(Channel::kValue, 2), v2(Channel::kValue, 2);
  // green ~ crimson at 0.9, blue ~ navy at 0.8; red is identical on both sides.
  v1.add(fx.lit("red"), std::vector<float>{1, 0});
  v1.add(fx.lit("green"), std::vector<float>{0.9f, std::sqrt(1 - 0.81f)});
  v1.add(fx.lit("blue"), std::vector<float>{0, 1});
  v2.add(fx.lit("red"), std::vector<float>{1, 0});
  v2.add(fx.lit("crimson"), std::vector<float>{1, 0});
  v2.add(fx.lit("navy"), std::vector<float>{0.6f, 0.8f});
  side.set_table(Side::kKg1, std::move(v1));
  side.set_table(Side::kKg2, std::move(v2));
  side.build_value_index(1);

  const auto same = side.literal_similarity(Side::kKg1, fx.lit("red"), fx.lit("red"));
  ASSERT_TRUE(same);
  EXPECT_EQ(same->f, 1.0);
  EXPECT_EQ(same->c, 1.0);

  // green's best non-identical partner: red and crimson tie at 0.9; lower id wins.
  const auto green = side.literal_similarity(Side::kKg1, fx.lit("green"), fx.lit("red"));
  ASSERT_TRUE(green);
  EXPECT_NEAR(green->f, 0.9, 1e-6);
  EXPECT_EQ(green->f, green->c);
  EXPECT_FALSE(side.literal_similarity(Side::kKg1, fx.lit("green"), fx.lit("navy")));

  const auto blue = side.literal_similarity(Side::kKg1, fx.lit("blue"), fx.lit("navy"));
  ASSERT_TRUE(blue);
  EXPECT_NEAR(blue->f, 0.8, 1e-6);
  for (const auto& p : side.literal_partners(Side::kKg1, fx.lit("red"))) {
    EXPECT_GE(p.tv.f, 0.0);
    EXPECT_LE(p.tv.c, 1.0);
  }
}

TEST(ValueIndex, MatchesBruteForce) {
  nala::KgPair kgs;
  std::mt19937_64 rng(3);
  std::normal_distribution<float> g;
  constexpr std::size_t kDim = 8, kN = 400, kK = 3;
  nala::EmbeddingTable a(Channel::kValue, kDim), b(Channel::kValue, kDim);
  for (std::size_t i = 0; i < kN; ++i) {
    std::vector<float> v(kDim);
    for (float& x : v) x = g(rng);
    a.add(kgs.terms.intern_literal("a" + std::to_string(i)), v);
    for (float& x : v) x = g(rng);
    b.add(kgs.terms.intern_literal("b" + std::to_string(i)), v);
  }
  // a few literals shared by both sides must never list themselves
  for (std::size_t i = 0; i < 5; ++i) {
    std::vector<float> v(kDim);
    for (float& x : v) x = g(rng);
    const TermId shared = kgs.terms.intern_literal("shared" + std::to_string(i));
    a.add(shared, v);
    b.add(shared, v);
  }
  const auto index = nala::ValueSimilarityIndex::build(a, b, kK);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const TermId id = a.ids()[i];
    std::vector<std::pair<double, TermId>> all;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (b.ids()[j] == id) continue;
      all.emplace_back(nala::cosine(a.row(i), b.row(j)), b.ids()[j]);
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    const auto got = index.neighbors(id);
    ASSERT_EQ(got.size(), kK);
    for (std::size_t k = 0; k < kK; ++k) {
      EXPECT_NEAR(got[k].cosine, all[k].first, 1e-5);
      if (std::abs(all[k].first - (k + 1 < all.size() ? all[k + 1].first : -2)) > 1e-5 &&
          (k == 0 || std::abs(all[k].first - all[k - 1].first) > 1e-5)) {
        EXPECT_EQ(got[k].literal, all[k].second);
      }
      EXPECT_NE(got[k].literal, id);
    }
  }
}
