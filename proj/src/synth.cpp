#include "visemelab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "visemelab/error.hpp"

namespace visemelab {

namespace fs = std::filesystem;

namespace {

std::mt19937_64 make_rng(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (auto p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

std::uint64_t symbol_key(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

const std::vector<std::vector<std::string>>& gesture_groups() {
  static const std::vector<std::vector<std::string>> groups = {
      {"ax", "eh"}, {"ow", "uw"}, {"ah", "ao", "oh"}, {"ea", "iy"},
      {"ch", "l"},  {"k", "w"},   {"f", "v"},         {"b", "y"},
      {"m", "p"},
  };
  return groups;
}

SpeakerProfile make_speaker(int id, std::size_t dimension, std::uint64_t seed,
                            const SynthOptions& options) {
  if (dimension == 0) throw ConfigError("dimension must be at least 1");
  SpeakerProfile profile;
  profile.id = id;
  profile.seed = seed;
  profile.dimension = dimension;

  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> duration(options.min_duration,
                                                  options.max_duration);
  std::uniform_real_distribution<double> spread_factor(0.6, 1.4);

  // Every phoneme not in a listed group is a gesture of its own.
  std::vector<std::vector<std::string>> groups = gesture_groups();
  for (const auto& p : Inventory::standard().phonemes()) {
    bool grouped = false;
    for (const auto& g : gesture_groups()) {
      grouped = grouped || std::find(g.begin(), g.end(), p.symbol()) != g.end();
    }
    if (!grouped) groups.push_back({p.symbol()});
  }

  for (const auto& group : groups) {
    auto shared = make_rng({seed, symbol_key(group.front()), 0x9e3779b9ull});
    std::vector<double> prototype(dimension);
    for (auto& v : prototype) v = options.gesture_spread * unit(shared);

    auto own = make_rng({seed, static_cast<std::uint64_t>(id), symbol_key(group.front()), 1});
    const double spread = options.phoneme_spread * spread_factor(own);
    for (const auto& symbol : group) {
      auto rng = make_rng({seed, static_cast<std::uint64_t>(id), symbol_key(symbol), 2});
      PhonemeEmission e;
      e.mean = prototype;
      for (auto& v : e.mean) v += spread * unit(rng);
      e.variance.assign(dimension, options.noise_variance);
      e.mean_duration = duration(rng);
      profile.phonemes.emplace(symbol, std::move(e));
    }
  }
  return profile;
}

SpeakerProfile perturb_speaker(const SpeakerProfile& base, double delta,
                               std::uint64_t seed) {
  if (delta < 0) throw ConfigError("delta must be nonnegative");
  SpeakerProfile out = base;
  auto rng = make_rng({seed, static_cast<std::uint64_t>(base.id), 3});
  std::bernoulli_distribution coin(0.5);
  std::vector<double> sign(base.dimension);
  for (auto& s : sign) s = coin(rng) ? 1.0 : -1.0;
  for (auto& [symbol, e] : out.phonemes) {
    for (std::size_t d = 0; d < base.dimension; ++d) {
      e.mean[d] += delta * std::sqrt(e.variance[d]) * sign[d];
    }
  }
  return out;
}

Corpus generate_corpus(const SpeakerProfile& profile, const Lexicon& lexicon,
                       int recitations, std::uint64_t seed) {
  if (recitations < 1) throw ConfigError("recitations must be positive");
  Corpus corpus;
  corpus.speaker = profile.id;
  corpus.recitations = recitations;
  const auto words = lexicon.words();
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int rec = 1; rec <= recitations; ++rec) {
    for (std::size_t w = 0; w < words.size(); ++w) {
      auto rng = make_rng({seed, static_cast<std::uint64_t>(profile.id),
                           static_cast<std::uint64_t>(rec), w});
      const auto& variants = lexicon.pronunciations(words[w]);
      std::uniform_int_distribution<std::size_t> pick(0, variants.size() - 1);
      Utterance utt;
      utt.word = words[w];
      utt.recitation = rec;
      utt.transcription.emplace_back(kSilence);
      const auto& pron = variants[pick(rng)];
      utt.transcription.insert(utt.transcription.end(), pron.begin(), pron.end());
      utt.transcription.emplace_back(kSilence);

      std::vector<double> frame(profile.dimension);
      for (const auto& ph : utt.transcription) {
        const auto& e = profile.phonemes.at(ph);
        // Geometric tail above the 3-frame minimum with the requested mean.
        std::geometric_distribution<int> extra(1.0 / (e.mean_duration - 2.0));
        const int frames = 3 + extra(rng);
        for (int f = 0; f < frames; ++f) {
          for (std::size_t d = 0; d < frame.size(); ++d) {
            frame[d] = e.mean[d] + std::sqrt(e.variance[d]) * unit(rng);
          }
          utt.features.push_frame(frame);
        }
      }
      corpus.utterances.push_back(std::move(utt));
    }
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& dir, const std::string& format) {
  if (format != "vlf" && format != "csv") throw ConfigError("unknown feature format " + format);
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["speaker"] = corpus.speaker;
  manifest["recitations"] = corpus.recitations;
  manifest["utterances"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < corpus.utterances.size(); ++k) {
    const auto& u = corpus.utterances[k];
    const std::string file = "r" + std::to_string(u.recitation) + "_" + u.word + "." + format;
    save_features((fs::path(dir) / file).string(), u.features);
    manifest["utterances"].push_back({{"word", u.word},
                                      {"recitation", u.recitation},
                                      {"file", file},
                                      {"transcription", u.transcription}});
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  out << manifest.dump(2) << '\n';
}

Corpus read_corpus(const std::string& dir) {
  const auto path = fs::path(dir) / "manifest.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("missing corpus manifest " + path.string());
  try {
    const auto manifest = nlohmann::json::parse(in);
    Corpus corpus;
    corpus.speaker = manifest.at("speaker").get<int>();
    corpus.recitations = manifest.at("recitations").get<int>();
    for (const auto& ju : manifest.at("utterances")) {
      Utterance u;
      u.word = ju.at("word").get<std::string>();
      u.recitation = ju.at("recitation").get<int>();
      u.transcription = ju.at("transcription").get<PhonemeSeq>();
      u.features = load_features((fs::path(dir) / ju.at("file").get<std::string>()).string());
      corpus.utterances.push_back(std::move(u));
    }
    return corpus;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad corpus manifest: ") + e.what());
  }
}

}  // namespace visemelab
