#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "eventea/embeddings.hpp"
#include "eventea/kg.hpp"

using namespace eventea;

TEST(Tokenize, KeepsHyphenatedAndRangeTokens) {
  EXPECT_EQ(tokenize("2010 GCC U-23 Championship"),
            (std::vector<std::string>{"2010", "gcc", "u-23", "championship"}));
  EXPECT_EQ(tokenize("1948\xE2\x80\x93" "49 Serie A"), (std::vector<std::string>{"1948\xE2\x80\x93" "49", "serie", "a"}));
  EXPECT_EQ(tokenize("Black May (1943)"), (std::vector<std::string>{"black", "may", "1943"}));
  EXPECT_TRUE(tokenize("  ").empty());
}

TEST(ProviderChain, EmptyTextGivesEmptySequence) {
  ProviderChain p(8, 1);
  EXPECT_TRUE(p.encode_sequence("").empty());
}

TEST(ProviderChain, HashFallbackIsDeterministicAndUnitNorm) {
  ProviderChain p(16, 42);
  auto a = p.encode_sequence("2010 GCC U-23 Championship");
  auto b = ProviderChain(16, 42).encode_sequence("2010 GCC U-23 Championship");
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a.vectors[i].norm(), 1.0, 1e-6);
    EXPECT_EQ(a.vectors[i], b.vectors[i]);
  }
  EXPECT_NE(hash_vector("x", 16, 1), hash_vector("x", 16, 2));
}

TEST(ProviderChain, HashFallbackSpotCheckDistinct) {
  std::set<std::vector<double>> seen;
  for (int i = 0; i < 10000; ++i) {
    Vector v = hash_vector("tok" + std::to_string(i), 8, 0);
    ASSERT_NEAR(v.norm(), 1.0, 1e-6);
    seen.insert(std::vector<double>(v.data(), v.data() + v.size()));
  }
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(ProviderChain, ContextualHitReturnsStoredVectors) {
  auto ctx = std::make_shared<ContextualStore>(3);
  std::vector<Vector> stored;
  for (int i = 0; i < 7; ++i) stored.push_back(Vector::Constant(3, 0.5 * i));
  ctx->insert("Doha Asian Games", stored);
  ProviderChain p(3, 0, ctx);
  auto seq = p.encode_sequence("Doha Asian Games");
  ASSERT_EQ(seq.size(), 7u);
  for (int i = 0; i < 7; ++i) EXPECT_TRUE(seq.vectors[i].isApprox(stored[i]));
}

TEST(ProviderChain, StaticStoreBeforeFallback) {
  auto st = std::make_shared<StaticStore>(2);
  Vector v(2);
  v << 3.0, 4.0;
  st->insert("doha", v);
  ProviderChain p(2, 9, nullptr, st);
  auto seq = p.encode_sequence("Doha Games");
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq.vectors[0], v);
  EXPECT_EQ(seq.vectors[1], hash_vector("games", 2, 9));
  EXPECT_THROW(ProviderChain(3, 0, nullptr, st), std::invalid_argument);
}

TEST(MeanPool, Examples) {
  TokenSequence one{{"a"}, {Vector::Constant(3, 2.0)}, 3};
  EXPECT_EQ(mean_pool(one), Vector::Constant(3, 2.0));
  Vector v(2);
  v << 1.0, -2.0;
  TokenSequence opposite{{"a", "b"}, {v, -v}, 2};
  EXPECT_EQ(mean_pool(opposite), Vector::Zero(2));
  Vector a(2), b(2), c(2), expected(2);
  a << 1, 2;
  b << 3, -4;
  c << 5, 8;
  expected << 3, 2;
  TokenSequence three{{"a", "b", "c"}, {a, b, c}, 2};
  EXPECT_TRUE(mean_pool(three).isApprox(expected, 1e-15));
  EXPECT_EQ(mean_pool(TokenSequence{{}, {}, 4}), Vector::Zero(4));
}

TEST(MeanPool, LiesInConvexHull) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    TokenSequence s;
    s.dim = 5;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 6); ++i) {
      Vector v(5);
      for (auto& x : v) x = n(rng);
      s.vectors.push_back(v);
      s.tokens.push_back("t");
    }
    Vector m = mean_pool(s);
    for (int c = 0; c < 5; ++c) {
      double lo = 1e300, hi = -1e300;
      for (const auto& v : s.vectors) {
        lo = std::min(lo, v[c]);
        hi = std::max(hi, v[c]);
      }
      ASSERT_GE(m[c], lo - 1e-12);
      ASSERT_LE(m[c], hi + 1e-12);
    }
  }
}

TEST(NameVectorBaseline, SingleTokenAndIdenticalNames) {
  ProviderChain p(6, 4);
  std::map<std::string, std::string, std::less<>> names{{"e1", "Doha"}, {"e2", "Asian Games"}, {"e3", "Asian Games"}};
  EmbeddingTable t = name_vector_baseline(p, names);
  EXPECT_TRUE(t.row(*t.find("e1")).isApprox(hash_vector("doha", 6, 4)));
  EXPECT_EQ(t.row(*t.find("e2")), t.row(*t.find("e3")));
}

TEST(ConcatAttributeValues, FixedOrdering) {
  KnowledgeGraph g;
  g.add_attribute_triple("e", "location", "Doha");
  g.add_attribute_triple("e", "date", "2010-05-14");
  g.add_attribute_triple("e", "label", "2010 Games");
  g.add_attribute_triple("f", "count", "12");
  g.add_entity("z");
  EXPECT_EQ(concat_attribute_values(g, "e", NamePolicy{}), "2010-05-14 Doha");
  EXPECT_EQ(concat_attribute_values(g, "f", NamePolicy{}), "12");
  EXPECT_EQ(concat_attribute_values(g, "z", NamePolicy{}), "");
}

TEST(StoreFormat, RoundTripAndErrors) {
  StaticStore s(3);
  Vector v(3);
  v << 0.1, -2.5, 1e-7;
  s.insert("doha", v);
  s.insert("games", Vector::Ones(3));
  std::stringstream buf;
  s.write(buf);
  StaticStore back = StaticStore::read(buf);
  EXPECT_EQ(back.dim(), 3u);
  EXPECT_EQ(back.size(), 2u);
  EXPECT_EQ(*back.find("doha"), v.cast<float>());

  std::stringstream bad("1 3\ndoha\t1 2\n");
  try {
    StaticStore::read(bad, "store.txt");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("store.txt:2"), std::string::npos) << e.what();
  }
  std::stringstream gap("2 1\nx#0\t1\nx#2\t1\n");
  EXPECT_THROW(ContextualStore::read(gap), DataError);
}

TEST(EmbeddingTable, RoundTripExact) {
  EmbeddingTable t;
  t.ids = {"a", "b"};
  t.vectors = Eigen::MatrixXd::Random(2, 4);
  std::stringstream buf;
  t.write(buf);
  EmbeddingTable back = EmbeddingTable::read(buf);
  EXPECT_EQ(back.ids, t.ids);
  EXPECT_EQ(back.vectors, t.vectors);
  std::stringstream dup("2 1\na\t1\na\t2\n");
  EXPECT_THROW(EmbeddingTable::read(dup), DataError);
}
