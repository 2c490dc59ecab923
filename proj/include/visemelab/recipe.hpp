#ifndef VISEMELAB_RECIPE_HPP_
#define VISEMELAB_RECIPE_HPP_

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "visemelab/clustering.hpp"
#include "visemelab/hmm.hpp"
#include "visemelab/lexicon.hpp"

namespace visemelab {

// Training schedule. Defaults: 3-state models, 11 re-estimations, variant
// realignment after the 7th, mixtures grown 1 -> 2 -> 3 -> 5 after
// iterations 3, 5 and 7.
struct RecipeConfig {
  int states = 3;
  int iterations = 11;
  int realign_after = 7;
  std::vector<std::pair<int, int>> split_schedule = {{3, 2}, {5, 3}, {7, 5}};
  double variance_floor_scale = 1e-4;

  int final_mixtures() const;
  friend bool operator==(const RecipeConfig&, const RecipeConfig&) = default;
};

struct TrainingItem {
  const FeatureSequence* features = nullptr;
  // Candidate label sequences (pronunciation variants); the first one is
  // used until realignment picks the best-scoring variant.
  std::vector<std::vector<std::string>> variants;
};

struct RecipeResult {
  ModelSet models;
  std::vector<double> log_likelihood;  // one entry per re-estimation
  std::vector<std::size_t> chosen_variant;
  std::vector<std::string> flags;
};

RecipeResult train_recipe(std::span<const TrainingItem> items,
                          std::span<const std::string> labels,
                          const RecipeConfig& config = {});

// Index of the variant with the best Viterbi score (first on ties).
std::size_t realign_variant(const ModelSet& models, const TrainingItem& item);

// Label sequence of a pronunciation through a map, with silence on both
// ends.
std::vector<std::string> map_transcription(std::span<const std::string> pronunciation,
                                           const P2VMap& map, bool with_silence = true);

// Decoding network: every word variant, silence optional at each end.
WordNetwork build_word_network(const Lexicon& lexicon, const P2VMap& map,
                               bool optional_silence = true);

// Training variants of a word through a map (silence on both ends).
std::vector<std::vector<std::string>> word_variants(const Lexicon& lexicon,
                                                    const std::string& word,
                                                    const P2VMap& map);

}  // namespace visemelab

#endif  // VISEMELAB_RECIPE_HPP_
