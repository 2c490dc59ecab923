#include <doctest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "visemelab/clustering.hpp"
#include "visemelab/error.hpp"

using namespace visemelab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ConfusionMatrix from_pairs(std::initializer_list<std::tuple<const char*, const char*, int>> cells) {
  ConfusionMatrix cm(Inventory::standard().without_silence());
  for (auto [r, h, n] : cells) cm.add(cm.inventory().index_of(r), cm.inventory().index_of(h), n);
  return cm;
}

}  // namespace

TEST_CASE("greedy clustering matches the subset-enumeration oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cm = oracle::random_confusions(rng, 12);
    const auto got = cluster(cm, "M_t");
    CHECK(got == oracle::cluster(cm, "M_t"));
    CHECK(validate_map(got, cm.inventory()).empty());
  }
}

TEST_CASE("visemes are cliques of one category") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cm = oracle::random_confusions(rng, 12);
    const auto map = cluster(cm);
    for (const auto& v : map.visemes) {
      std::set<PhonemeCategory> cats;
      for (const auto& p : v.phonemes) {
        cats.insert(cm.inventory().category(p));
        for (const auto& q : v.phonemes) {
          if (p != q) CHECK((cm.count(p, q) > 0 && cm.count(q, p) > 0));
        }
      }
      CHECK(cats.size() == 1);
    }
  }
}

TEST_CASE("scaling counts leaves the map unchanged") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto cm = oracle::random_confusions(rng, 10);
    ConfusionMatrix scaled(cm.inventory());
    for (std::size_t r = 0; r < cm.size(); ++r) {
      for (std::size_t h = 0; h < cm.size(); ++h) scaled.add(r, h, 3 * cm.count(r, h));
    }
    for (const auto& e : cm.emitted()) scaled.mark_emitted(e);
    CHECK(serialize_map(cluster(scaled)) == serialize_map(cluster(cm)));
  }
}

TEST_CASE("one-way confusion is not an edge; categories never mix") {
  auto cm = from_pairs({{"m", "p", 3}, {"p", "m", 1}, {"b", "p", 2}, {"iy", "y", 5}, {"y", "iy", 5},
                        {"b", "b", 1}, {"iy", "iy", 1}});
  const auto g = mutual_confusion_graph(cm);
  CHECK(g.has_edge("m", "p"));
  CHECK_FALSE(g.has_edge("b", "p"));
  CHECK_FALSE(g.has_edge("iy", "y"));
  CHECK(g.edge_count() == 1);
}

TEST_CASE("garb holds phonemes the recogniser never produced") {
  auto cm = from_pairs({{"b", "p", 1}, {"p", "b", 1}});
  const auto map = cluster(cm, "M_x");
  CHECK(map.garb.size() == 27);
  CHECK(map.garb.count("b") == 0);
  REQUIRE(map.visemes.size() == 1);
  CHECK(map.visemes[0].phonemes == PhonemeSet{"b", "p"});
  CHECK(map.label_of("b") == "v01");
  CHECK(map.label_of("z") == "garb");
  CHECK(map.label_of("sil") == "sil");
  CHECK(map.model_labels() == std::vector<std::string>{"v01", "garb", "sil"});
}

TEST_CASE("zero matrix gives an all-garb map") {
  ConfusionMatrix cm(Inventory::standard().without_silence());
  const auto map = cluster(cm);
  CHECK(map.visemes.empty());
  CHECK(map.garb.size() == 29);
}

TEST_CASE("vowel visemes are labelled before consonant visemes") {
  auto cm = from_pairs({{"b", "p", 9}, {"p", "b", 9}, {"ax", "eh", 1}, {"eh", "ax", 1}});
  const auto map = cluster(cm);
  REQUIRE(map.visemes.size() == 2);
  CHECK(map.visemes[0].phonemes == PhonemeSet{"ax", "eh"});
  CHECK(map.visemes[1].phonemes == PhonemeSet{"b", "p"});
}

TEST_CASE("bundled fixtures reproduce the reference maps byte for byte") {
  for (const char* m : {"M_1", "M_2", "M_3", "M_4", "M_1234", "M_234", "M_134", "M_124", "M_123"}) {
    CAPTURE(m);
    const auto cm = load_confusions_csv(bundled_data_path(std::string("confusions/") + m + ".csv"));
    const auto text = serialize_map(cluster(cm, m));
    CHECK(text == slurp(bundled_data_path(std::string("maps/") + m + ".json")));
    CHECK(serialize_map(cluster(cm, m)) == text);
  }
}

TEST_CASE("map JSON round-trip and validation") {
  const auto map = load_map(bundled_data_path("maps/M_2.json"));
  CHECK(parse_map(serialize_map(map)) == map);
  CHECK(validate_map(map, Inventory::standard()).empty());

  auto broken = map;
  broken.visemes[0].phonemes.insert(*broken.visemes[1].phonemes.begin());
  CHECK_FALSE(validate_map(broken, Inventory::standard()).empty());

  auto mixed = map;
  mixed.visemes[0].phonemes.insert("b");
  mixed.garb.erase("b");
  bool category_mix = false;
  for (const auto& v : validate_map(mixed, Inventory::standard())) {
    category_mix = category_mix || v.kind == MapViolation::Kind::kCategoryMix;
  }
  CHECK(category_mix);

  CHECK_THROWS_AS(parse_map("{not json"), ParseError);
  CHECK_THROWS_AS(load_map("/nonexistent.json"), ConfigError);
}

TEST_CASE("identity map is valid and has one viseme per phoneme") {
  const auto map = identity_map(Inventory::standard());
  CHECK(map.visemes.size() == 29);
  CHECK(validate_map(map, Inventory::standard()).empty());
}
