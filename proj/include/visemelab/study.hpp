#ifndef VISEMELAB_STUDY_HPP_
#define VISEMELAB_STUDY_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "visemelab/alignment.hpp"
#include "visemelab/clustering.hpp"
#include "visemelab/harness.hpp"
#include "visemelab/recipe.hpp"
#include "visemelab/synth.hpp"

namespace visemelab {

enum class MapSource { kLive, kFixtures };

struct StudyConfig {
  int speakers = 4;
  std::vector<std::uint64_t> seeds = {7};
  double delta = 6.0;
  std::size_t dimension = 10;
  int recitations = 7;
  std::vector<Family> families = all_families();
  MapSource map_source = MapSource::kLive;
  RecipeConfig word_recipe;     // viseme-level word models
  // Live phoneme recogniser. Single Gaussians: with ~6 examples of the
  // rarer phonemes per fold, five components overfit and blur confusions.
  RecipeConfig phoneme_recipe = [] {
    RecipeConfig r;
    r.split_schedule.clear();
    return r;
  }();
  SynthOptions synth;
  // Speaker id -> corpus directory. When set, every speaker must be listed
  // and the corpora replace generated data (one run, first seed as label).
  std::map<int, std::string> corpora;
  std::string fixtures_dir;  // defaults to the bundled confusion fixtures

  friend bool operator==(const StudyConfig&, const StudyConfig&) = default;
};

// Strict: unknown keys and inconsistent values raise ConfigError.
StudyConfig parse_study_config(const nlohmann::json& doc);
StudyConfig load_study_config(const std::string& path);
nlohmann::ordered_json study_config_to_json(const StudyConfig& config);

// Speaker 1 is the unperturbed base; every other speaker is its own profile
// moved by delta along a speaker-specific sign vector.
SpeakerProfile study_speaker(const StudyConfig& config, int speaker, std::uint64_t seed);

struct UtteranceOutcome {
  std::string word;
  std::string recognised;
  friend bool operator==(const UtteranceOutcome&, const UtteranceOutcome&) = default;
};

struct FoldRecord {
  std::uint64_t seed = 0;
  ExperimentSpec spec;
  FoldResult result;
  std::vector<UtteranceOutcome> outcomes;
  friend bool operator==(const FoldRecord&, const FoldRecord&) = default;
};

nlohmann::ordered_json fold_record_to_json(const FoldRecord& record);
FoldRecord fold_record_from_json(const nlohmann::json& doc);
std::string fold_record_filename(const FoldRecord& record);  // relative path

struct StudyResult {
  std::vector<FoldRecord> folds;  // ordered by seed, family, spec, fold
  std::map<std::uint64_t, std::map<std::string, P2VMap>> maps;  // per seed
};

// A runner executes independent jobs; it may use threads but must run each
// job exactly once. The default runs them in order.
using JobRunner = std::function<void(std::vector<std::function<void()>>&)>;
void run_serial(std::vector<std::function<void()>>& jobs);

// Phoneme confusions of one corpus from k-fold phoneme recognition: models
// trained on the other recitations decode each held-out one through a free
// phone loop; silence is stripped before alignment.
ConfusionMatrix live_confusions(const Corpus& corpus, const RecipeConfig& recipe,
                                const JobRunner& runner = run_serial);

// Trains word models for (map, corpus, fold) and decodes `test` fold items.
FoldResult evaluate_fold(const P2VMap& map, const Corpus& train, const Fold& train_fold,
                         const Corpus& test, const Fold& test_fold,
                         const RecipeConfig& recipe,
                         std::vector<UtteranceOutcome>* outcomes = nullptr);

// Every configured family for every seed. Missing corpora or fixtures raise
// ConfigError before any training starts.
StudyResult run_study(const StudyConfig& config, const JobRunner& runner = run_serial);

// Writes one JSON per (seed, spec, fold) plus the maps used.
void write_study(const StudyResult& result, const std::string& dir);
StudyResult read_study(const std::string& dir);

}  // namespace visemelab

#endif  // VISEMELAB_STUDY_HPP_
