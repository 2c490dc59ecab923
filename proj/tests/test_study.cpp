#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "visemelab/error.hpp"
#include "visemelab/report.hpp"
#include "visemelab/study.hpp"

using namespace visemelab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Three speakers, two recitations, short schedule: seconds, not minutes.
StudyConfig small_config() {
  return parse_study_config(json::parse(R"({
    "speakers": 3, "seeds": [3], "delta": 6.0, "dimension": 4, "recitations": 2,
    "hmm": {"iterations": 4, "realign_after": 2, "split_schedule": [[2, 2]]},
    "phoneme_hmm": {"iterations": 4, "split_schedule": []}
  })"));
}

const StudyResult& small_study() {
  static const StudyResult result = run_study(small_config());
  return result;
}

void threaded(std::vector<std::function<void()>>& jobs) {
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < 3; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < jobs.size(); i += 3) jobs[i]();
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

TEST_CASE("config defaults and strictness") {
  const auto c = parse_study_config(json::object());
  CHECK(c.speakers == 4);
  CHECK(c.families.size() == 5);
  CHECK(c.map_source == MapSource::kLive);
  CHECK(c.word_recipe.final_mixtures() == 5);
  CHECK(c.phoneme_recipe.final_mixtures() == 1);

  CHECK_THROWS_AS(parse_study_config(json{{"speeker", 4}}), ConfigError);
  CHECK_THROWS_AS(parse_study_config(json{{"families", {"SSD", "XX"}}}), ConfigError);
  CHECK_THROWS_AS(parse_study_config(json{{"map_source", "magic"}}), ConfigError);
  CHECK_THROWS_AS(parse_study_config(json{{"speakers", 0}}), ConfigError);
  CHECK_THROWS_AS(parse_study_config(json{{"seeds", json::array()}}), ConfigError);
  CHECK_THROWS_AS(parse_study_config(json{{"delta", -1}}), ConfigError);
  CHECK_THROWS_AS(parse_study_config(json{{"speakers", 2}}), ConfigError);  // SI
  CHECK_THROWS_AS(parse_study_config(json{{"hmm", {{"iterations", 0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_study_config(json{{"hmm", {{"split_schedule", {{3, 5}, {5, 2}}}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_study_config(json{{"corpora", {{"9", "x"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_study_config(json{{"speakers", "four"}}), ConfigError);
}

TEST_CASE("config JSON round-trip and relative paths") {
  auto c = small_config();
  c.corpora = {{1, "/a"}, {2, "/b"}, {3, "/c"}};
  CHECK(parse_study_config(json::parse(study_config_to_json(c).dump())) == c);

  const auto dir = fs::temp_directory_path() / "visemelab_config_test";
  fs::create_directories(dir);
  std::ofstream(dir / "study.json") << R"({"families": ["SSD"], "corpora": {"1": "c1"}})";
  const auto loaded = load_study_config((dir / "study.json").string());
  CHECK(loaded.corpora.at(1) == (dir / "c1").string());
  std::ofstream(dir / "bad.json") << "{";
  CHECK_THROWS_AS(load_study_config((dir / "bad.json").string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("study speakers: speaker 1 is the base, others are moved") {
  const auto c = parse_study_config(json::object());
  CHECK(study_speaker(c, 1, 7) == make_speaker(1, 10, 7));
  const auto s2 = study_speaker(c, 2, 7);
  const auto base2 = make_speaker(2, 10, 7);
  const double shift = s2.phonemes.at("b").mean[0] - base2.phonemes.at("b").mean[0];
  CHECK(std::abs(std::abs(shift) - 6.0) < 1e-12);
}

TEST_CASE("small study: every spec and fold, deterministic") {
  const auto& r = small_study();
  // SSD 3, DSD&D 6, DSD 6, MS 3, SI 3 specs, two folds each.
  CHECK(r.folds.size() == 42);
  for (const auto& f : r.folds) {
    CHECK(f.result.classified == 26);
    CHECK(f.result.correct >= 0);
    CHECK(f.result.correct <= f.result.classified);
    CHECK(f.outcomes.size() == 26);
    CHECK(classify(f.spec.map_source, f.spec.train_speaker, f.spec.test_speaker, 3) ==
          f.spec.family);
  }
  CHECK(r.maps.at(3).size() == 7);  // M_1..M_3, M_123, M_23, M_13, M_12
  const auto again = run_study(small_config(), threaded);
  CHECK(again.folds == r.folds);
  CHECK(again.maps == r.maps);
}

TEST_CASE("results directory round-trip") {
  const auto dir = fs::temp_directory_path() / "visemelab_study_test";
  fs::remove_all(dir);
  write_study(small_study(), dir.string());
  CHECK(fs::exists(dir / "seed3" / "DSDD" / "M_1_1_2_fold1.json"));
  const auto back = read_study(dir.string());
  CHECK(back.folds == small_study().folds);
  CHECK(back.maps == small_study().maps);
  fs::remove_all(dir);
  CHECK_THROWS_AS(read_study(dir.string()), ConfigError);
}

TEST_CASE("missing inputs fail before training") {
  auto c = small_config();
  c.corpora = {{1, "/nonexistent/c1"}, {2, "/nonexistent/c2"}, {3, "/nonexistent/c3"}};
  CHECK_THROWS_AS(run_study(c), ConfigError);
  c.corpora.erase(3);
  CHECK_THROWS_AS(run_study(c), ConfigError);

  auto f = small_config();
  f.map_source = MapSource::kFixtures;  // there are no fixtures for M_23 etc.
  f.fixtures_dir = "/nonexistent";
  CHECK_THROWS_AS(run_study(f), ConfigError);
}

TEST_CASE("fixture maps are the bundled maps") {
  auto c = parse_study_config(json::parse(R"({
    "families": ["SSD"], "map_source": "fixtures", "dimension": 3, "recitations": 2,
    "hmm": {"iterations": 2, "split_schedule": []}
  })"));
  const auto r = run_study(c);
  CHECK(r.folds.size() == 8);
  CHECK(r.maps.at(7).size() == 4);
  CHECK(r.maps.at(7).at("M_3") == load_map(bundled_data_path("maps/M_3.json")));
}

TEST_CASE("corpora on disk replace generated data") {
  const auto dir = fs::temp_directory_path() / "visemelab_corpora_test";
  fs::remove_all(dir);
  auto c = small_config();
  c.families = {Family::kSSD};
  for (int s = 1; s <= 3; ++s) {
    const auto corpus = generate_corpus(study_speaker(c, s, 3), bundled_lexicon(), 2, 3);
    write_corpus(corpus, (dir / std::to_string(s)).string(), "csv");
    c.corpora[s] = (dir / std::to_string(s)).string();
  }
  auto generated = small_config();
  generated.families = {Family::kSSD};
  CHECK(run_study(c).folds == run_study(generated).folds);
  fs::remove_all(dir);
}

TEST_CASE("accuracy falls as the test speaker drifts") {
  // Models trained on speaker A, tested on A moved by delta; averaged over seeds.
  const std::vector<double> deltas{0.0, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> mean(deltas.size(), 0.0);
  const auto map = identity_map(Inventory::standard());
  RecipeConfig recipe;
  recipe.split_schedule = {{3, 2}};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto a = make_speaker(1, 10, seed);
    const auto train = generate_corpus(a, bundled_lexicon(), 7, seed);
    const auto folds = crossval_folds(train, 7);
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const auto test = generate_corpus(perturb_speaker(a, deltas[i], seed), bundled_lexicon(), 7, seed);
      const auto test_folds = crossval_folds(test, 7);
      for (std::size_t k = 0; k < folds.size(); ++k) {
        mean[i] += evaluate_fold(map, train, folds[k], test, test_folds[k], recipe).correctness() / 35;
      }
    }
  }
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    CAPTURE(deltas[i]);
    CHECK(mean[i] <= mean[i - 1]);
  }
  CHECK(mean.front() > mean.back());
}

TEST_CASE("report: families, homophones, JSON round-trip") {
  const auto report = build_report(small_study());
  CHECK(report.families.size() == 5);
  const auto* ssd = report.family(Family::kSSD);
  REQUIRE(ssd != nullptr);
  CHECK(ssd->specs.size() == 3);
  CHECK(ssd->folds == 6);
  CHECK(report.homophones.size() == 7);
  REQUIRE(report.scores.has_value());
  CHECK(report.scores->maps == std::vector<int>{1, 2, 3});
  CHECK(report_from_json(json::parse(report_to_json(report).dump())) == report);
  const auto text = render_report(report);
  CHECK(text.find("Family DSD&D") != std::string::npos);
  CHECK(text.find("15.9%") != std::string::npos);
}

TEST_CASE("empty results give an empty report") {
  const auto report = build_report(StudyResult{});
  CHECK(report.empty());
  CHECK_FALSE(report.scores.has_value());
  CHECK(render_report(report) == "no results\n");
  CHECK(report_from_json(json::parse(report_to_json(report).dump())) == report);
  CHECK_THROWS_AS(report_from_json(json{{"families", 3}}), ParseError);
}
