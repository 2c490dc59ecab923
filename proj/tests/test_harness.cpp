#include <doctest.h>

#include <cmath>

#include "reference_outcomes.hpp"
#include "visemelab/error.hpp"
#include "visemelab/harness.hpp"

using namespace visemelab;

TEST_CASE("family classification") {
  CHECK(classify({1}, 1, 1, 4) == Family::kSSD);
  CHECK(classify({2}, 2, 1, 4) == Family::kDSDD);
  CHECK(classify({2}, 1, 1, 4) == Family::kDSD);
  CHECK(classify({1, 2, 3, 4}, 3, 3, 4) == Family::kMS);
  CHECK(classify({2, 3, 4}, 1, 1, 4) == Family::kSI);
  CHECK_FALSE(classify({2, 3}, 1, 1, 4).has_value());
  CHECK_FALSE(classify({2}, 1, 3, 4).has_value());
  CHECK_FALSE(classify({5}, 1, 1, 4).has_value());
  CHECK_FALSE(classify({1}, 0, 1, 4).has_value());
}

TEST_CASE("family specs: counts and consistency") {
  const std::map<Family, std::size_t> expect = {{Family::kSSD, 4}, {Family::kDSDD, 12},
                                                {Family::kDSD, 12}, {Family::kMS, 4},
                                                {Family::kSI, 4}};
  std::set<std::tuple<SpeakerSet, int, int>> all;
  for (auto f : all_families()) {
    const auto specs = family_specs(f, 4);
    CHECK(specs.size() == expect.at(f));
    for (const auto& s : specs) {
      CHECK(classify(s.map_source, s.train_speaker, s.test_speaker, 4) == f);
      CHECK(all.insert({s.map_source, s.train_speaker, s.test_speaker}).second);
    }
  }
  CHECK(family_specs(Family::kSI, 4)[0].name() == "M_234(1,1)");
  CHECK(parse_family("DSD&D") == Family::kDSDD);
  CHECK(parse_family("DSDD") == Family::kDSDD);
  CHECK_THROWS_AS(parse_family("XYZ"), ConfigError);
}

TEST_CASE("classification is unique over every triple") {
  // Every (n, p, q) with n a nonempty subset of 4 speakers.
  int classified = 0;
  for (int bits = 1; bits < 16; ++bits) {
    SpeakerSet n;
    for (int s = 0; s < 4; ++s) {
      if (bits & (1 << s)) n.insert(s + 1);
    }
    for (int p = 1; p <= 4; ++p) {
      for (int q = 1; q <= 4; ++q) {
        const auto f = classify(n, p, q, 4);
        if (!f) continue;
        ++classified;
        const auto specs = family_specs(*f, 4);
        CHECK(std::count(specs.begin(), specs.end(), ExperimentSpec{n, p, q, *f}) == 1);
      }
    }
  }
  CHECK(classified == 36);
}

TEST_CASE("folds partition the corpus by recitation") {
  Corpus corpus;
  for (int r = 1; r <= 7; ++r) {
    for (const auto& w : bundled_lexicon().words()) corpus.utterances.push_back({w, r, {}, {}});
  }
  const auto folds = crossval_folds(corpus, 7);
  REQUIRE(folds.size() == 7);
  std::vector<int> hits(corpus.utterances.size(), 0);
  for (const auto& f : folds) {
    CHECK(f.test.size() == 26);
    CHECK(f.train.size() == 156);
    for (auto i : f.test) {
      ++hits[i];
      CHECK(corpus.utterances[i].recitation == f.recitation);
    }
    for (auto i : f.train) CHECK(corpus.utterances[i].recitation != f.recitation);
  }
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(crossval_folds(corpus, 6), ConfigError);

  Corpus toy;
  toy.utterances = {{"A", 1, {}, {}}, {"B", 2, {}, {}}, {"C", 1, {}, {}}};
  const auto two = crossval_folds(toy, 2);
  CHECK(two[0].test == std::vector<std::size_t>{0, 2});
  CHECK(two[0].train == two[1].test);
}

TEST_CASE("correctness mean and standard error") {
  std::vector<FoldResult> perfect;
  for (int f = 1; f <= 7; ++f) perfect.push_back({f, 26, 26});
  CHECK(correctness(perfect).mean == 1.0);
  CHECK(correctness(perfect).standard_error == 0.0);

  std::vector<FoldResult> half;
  for (int f = 1; f <= 7; ++f) half.push_back({f, 26, 13});
  CHECK(correctness(half).standard_error == 0.0);

  // [1, 0, 0, 0, 0, 0, 0]: mean 1/7, sample variance 1/7, SE = sqrt(1/7)/sqrt(7) = 1/7.
  std::vector<FoldResult> one{{1, 26, 26}};
  for (int f = 2; f <= 7; ++f) one.push_back({f, 26, 0});
  const auto c = correctness(one);
  CHECK(std::abs(c.mean - 1.0 / 7) < 1e-15);
  CHECK(std::abs(c.standard_error - 1.0 / 7) < 1e-15);
  CHECK_THROWS_AS(correctness(std::vector<FoldResult>{}), Error);
  CHECK(FoldResult{1, 0, 0}.correctness() == 0.0);
}

TEST_CASE("weighted score bands") {
  const Correctness base{0.5, 0.1};
  CHECK(weighted_score(0.5, base) == 0);
  CHECK(weighted_score(0.55, base) == 1);
  CHECK(weighted_score(0.65, base) == 2);
  CHECK(weighted_score(0.45, base) == -1);
  CHECK(weighted_score(0.3, base) == -2);
  CHECK(weighted_score(0.75, Correctness{0.5, 0.25}) == 1);  // on the bar is inside it
}

TEST_CASE("published outcomes give the published score matrix") {
  const auto o = reference::encode();
  const auto m = weighted_scores(o.dsd, o.ssd);
  for (int p = 0; p < 4; ++p) {
    for (int n = 0; n < 4; ++n) CHECK(m.scores[p][n] == reference::kScores[p][n]);
  }
  CHECK(m.totals == std::vector<int>{-4, 0, 3, 2});
  CHECK(m.ranking() == std::vector<int>{3, 4, 2, 1});
}

TEST_CASE("missing DSD cell is a configuration error") {
  auto o = reference::encode();
  o.dsd.erase({2, 1});
  CHECK_THROWS_AS(weighted_scores(o.dsd, o.ssd), ConfigError);
}
