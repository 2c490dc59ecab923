#ifndef VISEMELAB_SYNTH_HPP_
#define VISEMELAB_SYNTH_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "visemelab/features.hpp"
#include "visemelab/lexicon.hpp"

namespace visemelab {

struct PhonemeEmission {
  std::vector<double> mean;
  std::vector<double> variance;
  double mean_duration = 5.0;  // frames, >= 3

  friend bool operator==(const PhonemeEmission&, const PhonemeEmission&) = default;
};

struct SpeakerProfile {
  int id = 0;
  std::uint64_t seed = 0;
  std::size_t dimension = 0;
  std::map<std::string, PhonemeEmission> phonemes;

  friend bool operator==(const SpeakerProfile&, const SpeakerProfile&) = default;
};

// Shape of the synthetic feature space. Phonemes sharing a latent mouth
// gesture get nearby means (`phoneme_spread`), gestures sit `gesture_spread`
// apart; emission noise has unit variance.
struct SynthOptions {
  double gesture_spread = 3.0;
  double phoneme_spread = 0.3;
  double noise_variance = 1.0;
  double min_duration = 6.0;
  double max_duration = 10.0;
  friend bool operator==(const SynthOptions&, const SynthOptions&) = default;
};

// Groups of phonemes that share a latent gesture in the generator.
const std::vector<std::vector<std::string>>& gesture_groups();

// Gesture prototypes depend only on `seed`; per-phoneme offsets, spreads
// and durations also depend on `id`.
SpeakerProfile make_speaker(int id, std::size_t dimension, std::uint64_t seed,
                            const SynthOptions& options = {});

// Moves every phoneme mean by delta * stddev_d * sign_d, with one
// deterministic sign vector per (profile, seed).
SpeakerProfile perturb_speaker(const SpeakerProfile& base, double delta,
                               std::uint64_t seed);

struct Utterance {
  std::string word;
  int recitation = 0;  // 1-based
  FeatureSequence features;
  PhonemeSeq transcription;  // silence at both ends

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Corpus {
  int speaker = 0;
  int recitations = 0;
  std::vector<Utterance> utterances;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

Corpus generate_corpus(const SpeakerProfile& profile, const Lexicon& lexicon,
                       int recitations, std::uint64_t seed);

// Directory layout: manifest.json plus one feature file per utterance.
void write_corpus(const Corpus& corpus, const std::string& dir,
                  const std::string& format = "vlf");
Corpus read_corpus(const std::string& dir);

}  // namespace visemelab

#endif  // VISEMELAB_SYNTH_HPP_
