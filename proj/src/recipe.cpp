#include "visemelab/recipe.hpp"

#include <algorithm>

#include "visemelab/error.hpp"
#include "visemelab/translation.hpp"

namespace visemelab {

int RecipeConfig::final_mixtures() const {
  int m = 1;
  for (const auto& [after, target] : split_schedule) {
    if (after < iterations) m = std::max(m, target);
  }
  return m;
}

std::size_t realign_variant(const ModelSet& models, const TrainingItem& item) {
  std::size_t best = 0;
  double best_score = kLogZero;
  for (std::size_t v = 0; v < item.variants.size(); ++v) {
    EmissionCache cache(models, *item.features, item.variants[v]);
    const double score = viterbi_log_likelihood(
        make_chain(models, cache, item.variants[v]), item.features->frames());
    if (score > best_score) {
      best_score = score;
      best = v;
    }
  }
  return best;
}

RecipeResult train_recipe(std::span<const TrainingItem> items,
                          std::span<const std::string> labels,
                          const RecipeConfig& config) {
  if (items.empty()) throw ConfigError("training set is empty");
  if (config.iterations < 1) throw ConfigError("iterations must be positive");
  std::vector<FeatureSequence> frames;
  frames.reserve(items.size());
  for (const auto& item : items) {
    if (item.variants.empty()) throw ConfigError("training item without transcription");
    frames.push_back(*item.features);
  }

  RecipeResult result;
  result.models = flat_start(frames, labels, config.states, 1, config.variance_floor_scale);
  result.chosen_variant.assign(items.size(), 0);

  std::vector<TrainingExample> examples(items.size());
  auto refresh_examples = [&] {
    for (std::size_t u = 0; u < items.size(); ++u) {
      examples[u] = {items[u].features, items[u].variants[result.chosen_variant[u]]};
    }
  };
  refresh_examples();

  for (int it = 1; it <= config.iterations; ++it) {
    auto bw = baum_welch(result.models, examples, 1);
    result.log_likelihood.push_back(bw.log_likelihood.front());
    if (it == config.iterations) {
      result.flags.insert(result.flags.end(), bw.flags.begin(), bw.flags.end());
    }
    if (it == config.realign_after && it < config.iterations) {
      for (std::size_t u = 0; u < items.size(); ++u) {
        if (items[u].variants.size() > 1) {
          result.chosen_variant[u] = realign_variant(result.models, items[u]);
        }
      }
      refresh_examples();
    }
    for (const auto& [after, target] : config.split_schedule) {
      if (after == it && it < config.iterations) {
        split_mixtures(result.models, static_cast<std::size_t>(target));
      }
    }
  }
  return result;
}

std::vector<std::string> map_transcription(std::span<const std::string> pronunciation,
                                           const P2VMap& map, bool with_silence) {
  std::vector<std::string> labels;
  if (with_silence) labels.emplace_back(kSilLabel);
  for (auto& l : apply_map(pronunciation, map)) labels.push_back(std::move(l));
  if (with_silence) labels.emplace_back(kSilLabel);
  return labels;
}

std::vector<std::vector<std::string>> word_variants(const Lexicon& lexicon,
                                                    const std::string& word,
                                                    const P2VMap& map) {
  std::vector<std::vector<std::string>> out;
  for (const auto& pron : lexicon.pronunciations(word)) {
    auto labels = map_transcription(pron, map, true);
    if (std::find(out.begin(), out.end(), labels) == out.end()) {
      out.push_back(std::move(labels));
    }
  }
  return out;
}

WordNetwork build_word_network(const Lexicon& lexicon, const P2VMap& map,
                               bool optional_silence) {
  WordNetwork net;
  for (const auto& [word, prons] : lexicon.entries()) {
    WordEntry entry{word, {}};
    auto add = [&](std::vector<std::string> labels) {
      if (std::find(entry.variants.begin(), entry.variants.end(), labels) ==
          entry.variants.end()) {
        entry.variants.push_back(std::move(labels));
      }
    };
    for (const auto& pron : prons) {
      const auto core = apply_map(pron, map);
      for (int lead = 1; lead >= 0; --lead) {
        for (int trail = 1; trail >= 0; --trail) {
          if (!optional_silence && !(lead && trail)) continue;
          std::vector<std::string> labels;
          if (lead) labels.emplace_back(kSilLabel);
          labels.insert(labels.end(), core.begin(), core.end());
          if (trail) labels.emplace_back(kSilLabel);
          add(std::move(labels));
        }
      }
    }
    net.words.push_back(std::move(entry));
  }
  return net;
}

}  // namespace visemelab
