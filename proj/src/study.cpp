#include "visemelab/study.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "visemelab/error.hpp"

namespace visemelab {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void check_keys(const json& doc, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

RecipeConfig parse_recipe(const json& doc, const std::string& where) {
  check_keys(doc, {"states", "iterations", "realign_after", "split_schedule",
                   "variance_floor_scale"},
             where);
  RecipeConfig r;
  r.states = doc.value("states", r.states);
  r.iterations = doc.value("iterations", r.iterations);
  r.realign_after = doc.value("realign_after", r.realign_after);
  r.variance_floor_scale = doc.value("variance_floor_scale", r.variance_floor_scale);
  if (doc.contains("split_schedule")) {
    r.split_schedule.clear();
    for (const auto& step : doc.at("split_schedule")) {
      if (!step.is_array() || step.size() != 2) {
        throw ConfigError(where + ".split_schedule entries are [iteration, mixtures]");
      }
      r.split_schedule.emplace_back(step[0].get<int>(), step[1].get<int>());
    }
  }
  if (r.states < 1) throw ConfigError(where + ".states must be positive");
  if (r.iterations < 1) throw ConfigError(where + ".iterations must be positive");
  if (r.variance_floor_scale <= 0) throw ConfigError(where + ".variance_floor_scale must be positive");
  int last = 1;
  for (const auto& [after, target] : r.split_schedule) {
    if (target < last) throw ConfigError(where + ".split_schedule must not shrink mixtures");
    last = target;
  }
  return r;
}

ordered_json recipe_to_json(const RecipeConfig& r) {
  ordered_json doc;
  doc["states"] = r.states;
  doc["iterations"] = r.iterations;
  doc["realign_after"] = r.realign_after;
  doc["split_schedule"] = ordered_json::array();
  for (const auto& [after, target] : r.split_schedule) {
    doc["split_schedule"].push_back({after, target});
  }
  doc["variance_floor_scale"] = r.variance_floor_scale;
  return doc;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Canonical record order: seed, family, test speaker, map source, train
// speaker, fold. Matches family_specs() within a family.
auto record_key(const FoldRecord& r) {
  return std::tie(r.seed, r.spec.family, r.spec.test_speaker, r.spec.map_source,
                  r.spec.train_speaker, r.result.fold);
}

std::vector<SequencePair> phoneme_fold_pairs(const Corpus& corpus, const Fold& fold,
                                             const RecipeConfig& recipe) {
  const auto& inventory = Inventory::standard();
  const auto labels = inventory.symbols();
  std::vector<TrainingItem> items;
  for (auto u : fold.train) {
    const auto& utt = corpus.utterances[u];
    items.push_back({&utt.features, {utt.transcription}});
  }
  const auto trained = train_recipe(items, labels, recipe);

  auto strip = [](const std::vector<std::string>& seq) {
    PhonemeSeq out;
    for (const auto& s : seq) {
      if (s != kSilence) out.push_back(s);
    }
    return out;
  };
  std::vector<SequencePair> pairs;
  for (auto u : fold.test) {
    const auto& utt = corpus.utterances[u];
    const auto hyp = decode_label_loop(trained.models, labels, utt.features);
    pairs.emplace_back(strip(utt.transcription), strip(hyp));
  }
  return pairs;
}

struct WordRecogniser {
  ModelSet models;
  WordNetwork network;
};

WordRecogniser train_words(const P2VMap& map, const Corpus& corpus, const Fold& fold,
                           const RecipeConfig& recipe) {
  const auto& lexicon = bundled_lexicon();
  std::vector<TrainingItem> items;
  for (auto u : fold.train) {
    const auto& utt = corpus.utterances[u];
    items.push_back({&utt.features, word_variants(lexicon, utt.word, map)});
  }
  return {train_recipe(items, map.model_labels(), recipe).models,
          build_word_network(lexicon, map)};
}

FoldResult decode_fold(const WordRecogniser& rec, const Corpus& corpus, const Fold& fold,
                       std::vector<UtteranceOutcome>* outcomes) {
  FoldResult result;
  result.fold = fold.recitation;
  for (auto u : fold.test) {
    const auto& utt = corpus.utterances[u];
    const auto decoded = viterbi_decode(rec.models, rec.network, utt.features);
    ++result.classified;
    if (decoded.word == utt.word) ++result.correct;
    if (outcomes) outcomes->push_back({utt.word, decoded.word});
  }
  return result;
}

}  // namespace

StudyConfig parse_study_config(const json& doc) {
  check_keys(doc, {"speakers", "seeds", "delta", "dimension", "recitations", "families",
                   "map_source", "hmm", "phoneme_hmm", "synth", "corpora", "fixtures_dir"},
             "study config");
  StudyConfig c;
  try {
    c.speakers = doc.value("speakers", c.speakers);
    if (doc.contains("seeds")) c.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    c.delta = doc.value("delta", c.delta);
    c.dimension = doc.value("dimension", c.dimension);
    c.recitations = doc.value("recitations", c.recitations);
    if (doc.contains("families")) {
      c.families.clear();
      for (const auto& f : doc.at("families")) c.families.push_back(parse_family(f.get<std::string>()));
    }
    const auto source = doc.value("map_source", std::string("live"));
    if (source == "live") {
      c.map_source = MapSource::kLive;
    } else if (source == "fixtures") {
      c.map_source = MapSource::kFixtures;
    } else {
      throw ConfigError("map_source must be \"live\" or \"fixtures\"");
    }
    if (doc.contains("hmm")) c.word_recipe = parse_recipe(doc.at("hmm"), "hmm");
    if (doc.contains("phoneme_hmm")) c.phoneme_recipe = parse_recipe(doc.at("phoneme_hmm"), "phoneme_hmm");
    if (doc.contains("synth")) {
      const auto& s = doc.at("synth");
      check_keys(s, {"gesture_spread", "phoneme_spread", "noise_variance", "min_duration",
                     "max_duration"},
                 "synth");
      c.synth.gesture_spread = s.value("gesture_spread", c.synth.gesture_spread);
      c.synth.phoneme_spread = s.value("phoneme_spread", c.synth.phoneme_spread);
      c.synth.noise_variance = s.value("noise_variance", c.synth.noise_variance);
      c.synth.min_duration = s.value("min_duration", c.synth.min_duration);
      c.synth.max_duration = s.value("max_duration", c.synth.max_duration);
    }
    if (doc.contains("corpora")) {
      for (const auto& [key, path] : doc.at("corpora").items()) {
        c.corpora[std::stoi(key)] = path.get<std::string>();
      }
    }
    c.fixtures_dir = doc.value("fixtures_dir", std::string());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad study config: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("corpora keys must be speaker numbers");
  }

  if (c.speakers < 1 || c.speakers > 9) throw ConfigError("speakers must be between 1 and 9");
  if (c.seeds.empty()) throw ConfigError("at least one seed is required");
  if (c.delta < 0) throw ConfigError("delta must be nonnegative");
  if (c.dimension < 1) throw ConfigError("dimension must be positive");
  if (c.recitations < 2) throw ConfigError("cross-validation needs at least 2 recitations");
  if (c.families.empty()) throw ConfigError("no experiment families selected");
  std::sort(c.families.begin(), c.families.end());
  if (std::adjacent_find(c.families.begin(), c.families.end()) != c.families.end()) {
    throw ConfigError("duplicate experiment family");
  }
  if (c.speakers < 2) {
    for (auto f : c.families) {
      if (f != Family::kSSD) throw ConfigError(to_string(f) + " needs at least 2 speakers");
    }
  }
  // With two speakers "all but q" is a single speaker and SI collapses into DSD.
  if (c.speakers < 3 && std::count(c.families.begin(), c.families.end(), Family::kSI)) {
    throw ConfigError("SI needs at least 3 speakers");
  }
  if (c.synth.min_duration < 3 || c.synth.max_duration < c.synth.min_duration) {
    throw ConfigError("synth durations must satisfy 3 <= min_duration <= max_duration");
  }
  for (const auto& [speaker, _] : c.corpora) {
    if (speaker < 1 || speaker > c.speakers) {
      throw ConfigError("corpus given for unknown speaker " + std::to_string(speaker));
    }
  }
  return c;
}

StudyConfig load_study_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  auto config = parse_study_config(doc);
  // Relative paths are relative to the config file.
  const auto base = fs::path(path).parent_path();
  for (auto& [_, dir] : config.corpora) {
    if (fs::path(dir).is_relative()) dir = (base / dir).string();
  }
  if (!config.fixtures_dir.empty() && fs::path(config.fixtures_dir).is_relative()) {
    config.fixtures_dir = (base / config.fixtures_dir).string();
  }
  return config;
}

ordered_json study_config_to_json(const StudyConfig& c) {
  ordered_json doc;
  doc["speakers"] = c.speakers;
  doc["seeds"] = c.seeds;
  doc["delta"] = c.delta;
  doc["dimension"] = c.dimension;
  doc["recitations"] = c.recitations;
  doc["families"] = ordered_json::array();
  for (auto f : c.families) doc["families"].push_back(to_string(f));
  doc["map_source"] = c.map_source == MapSource::kLive ? "live" : "fixtures";
  doc["hmm"] = recipe_to_json(c.word_recipe);
  doc["phoneme_hmm"] = recipe_to_json(c.phoneme_recipe);
  doc["synth"] = {{"gesture_spread", c.synth.gesture_spread},
                  {"phoneme_spread", c.synth.phoneme_spread},
                  {"noise_variance", c.synth.noise_variance},
                  {"min_duration", c.synth.min_duration},
                  {"max_duration", c.synth.max_duration}};
  if (!c.corpora.empty()) {
    doc["corpora"] = ordered_json::object();
    for (const auto& [speaker, dir] : c.corpora) doc["corpora"][std::to_string(speaker)] = dir;
  }
  if (!c.fixtures_dir.empty()) doc["fixtures_dir"] = c.fixtures_dir;
  return doc;
}

SpeakerProfile study_speaker(const StudyConfig& config, int speaker, std::uint64_t seed) {
  auto profile = make_speaker(speaker, config.dimension, seed, config.synth);
  if (speaker == 1) return profile;
  return perturb_speaker(profile, config.delta, seed);
}

ordered_json fold_record_to_json(const FoldRecord& r) {
  ordered_json doc;
  doc["seed"] = r.seed;
  doc["spec"] = r.spec.name();
  doc["family"] = to_string(r.spec.family);
  doc["map_source"] = std::vector<int>(r.spec.map_source.begin(), r.spec.map_source.end());
  doc["train_speaker"] = r.spec.train_speaker;
  doc["test_speaker"] = r.spec.test_speaker;
  doc["fold"] = r.result.fold;
  doc["classified"] = r.result.classified;
  doc["correct"] = r.result.correct;
  doc["correctness"] = r.result.correctness();
  doc["outcomes"] = ordered_json::array();
  for (const auto& o : r.outcomes) {
    doc["outcomes"].push_back({{"word", o.word}, {"recognised", o.recognised}});
  }
  return doc;
}

FoldRecord fold_record_from_json(const json& doc) {
  try {
    FoldRecord r;
    r.seed = doc.at("seed").get<std::uint64_t>();
    const auto n = doc.at("map_source").get<std::vector<int>>();
    r.spec.map_source = SpeakerSet(n.begin(), n.end());
    r.spec.train_speaker = doc.at("train_speaker").get<int>();
    r.spec.test_speaker = doc.at("test_speaker").get<int>();
    r.spec.family = parse_family(doc.at("family").get<std::string>());
    r.result.fold = doc.at("fold").get<int>();
    r.result.classified = doc.at("classified").get<int>();
    r.result.correct = doc.at("correct").get<int>();
    if (r.result.correct < 0 || r.result.correct > r.result.classified) {
      throw ParseError("fold record with correct outside [0, classified]");
    }
    for (const auto& o : doc.value("outcomes", json::array())) {
      r.outcomes.push_back({o.at("word").get<std::string>(), o.at("recognised").get<std::string>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad fold record: ") + e.what());
  }
}

std::string fold_record_filename(const FoldRecord& r) {
  std::string family = to_string(r.spec.family);
  std::erase(family, '&');
  return "seed" + std::to_string(r.seed) + "/" + family + "/" +
         map_designation(r.spec.map_source) + "_" + std::to_string(r.spec.train_speaker) + "_" +
         std::to_string(r.spec.test_speaker) + "_fold" + std::to_string(r.result.fold) + ".json";
}

void run_serial(std::vector<std::function<void()>>& jobs) {
  for (auto& job : jobs) job();
}

ConfusionMatrix live_confusions(const Corpus& corpus, const RecipeConfig& recipe,
                                const JobRunner& runner) {
  const auto folds = crossval_folds(corpus, corpus.recitations);
  std::vector<std::vector<SequencePair>> pairs(folds.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    jobs.emplace_back([&, f] { pairs[f] = phoneme_fold_pairs(corpus, folds[f], recipe); });
  }
  runner(jobs);
  std::vector<SequencePair> all;
  for (auto& p : pairs) all.insert(all.end(), p.begin(), p.end());
  return accumulate_confusions(all, Inventory::standard());
}

FoldResult evaluate_fold(const P2VMap& map, const Corpus& train, const Fold& train_fold,
                         const Corpus& test, const Fold& test_fold,
                         const RecipeConfig& recipe,
                         std::vector<UtteranceOutcome>* outcomes) {
  return decode_fold(train_words(map, train, train_fold, recipe), test, test_fold, outcomes);
}

StudyResult run_study(const StudyConfig& config, const JobRunner& runner) {
  const int S = config.speakers;
  const int k = config.recitations;

  std::vector<ExperimentSpec> specs;
  std::set<SpeakerSet> sources;
  for (auto family : config.families) {
    for (auto& spec : family_specs(family, S)) {
      sources.insert(spec.map_source);
      specs.push_back(std::move(spec));
    }
  }
  std::set<int> source_speakers;
  for (const auto& n : sources) source_speakers.insert(n.begin(), n.end());

  // Everything that can be missing is checked before training starts.
  std::map<std::string, ConfusionMatrix> fixture_confusions;
  if (config.map_source == MapSource::kFixtures) {
    const auto dir = config.fixtures_dir.empty() ? bundled_data_path("confusions")
                                                 : config.fixtures_dir;
    for (const auto& n : sources) {
      const auto path = fs::path(dir) / (map_designation(n) + ".csv");
      if (!fs::exists(path)) throw ConfigError("missing confusion fixture " + path.string());
      fixture_confusions.emplace(map_designation(n), load_confusions_csv(path.string()));
    }
  }
  std::vector<std::uint64_t> seeds = config.seeds;
  std::map<int, Corpus> loaded;
  if (!config.corpora.empty()) {
    for (int s = 1; s <= S; ++s) {
      auto it = config.corpora.find(s);
      if (it == config.corpora.end()) {
        throw ConfigError("no corpus for speaker " + std::to_string(s));
      }
      auto corpus = read_corpus(it->second);
      corpus.speaker = s;
      crossval_folds(corpus, k);
      loaded.emplace(s, std::move(corpus));
    }
    seeds.resize(1);
  }

  StudyResult result;
  std::map<std::uint64_t, std::map<int, Corpus>> corpora;
  std::map<std::uint64_t, std::map<int, std::vector<Fold>>> folds;
  for (auto seed : seeds) {
    for (int s = 1; s <= S; ++s) {
      Corpus corpus = loaded.empty()
                          ? generate_corpus(study_speaker(config, s, seed), bundled_lexicon(), k, seed)
                          : loaded.at(s);
      folds[seed][s] = crossval_folds(corpus, k);
      corpora[seed].emplace(s, std::move(corpus));
    }
  }

  // Maps, live or from fixtures.
  if (config.map_source == MapSource::kLive) {
    std::map<std::pair<std::uint64_t, int>, std::vector<std::vector<SequencePair>>> pairs;
    std::vector<std::function<void()>> jobs;
    for (auto seed : seeds) {
      for (int s : source_speakers) {
        auto& slot = pairs[{seed, s}];
        slot.resize(folds[seed][s].size());
        for (std::size_t f = 0; f < slot.size(); ++f) {
          jobs.emplace_back([&, seed, s, f] {
            slot[f] = phoneme_fold_pairs(corpora[seed].at(s), folds[seed][s][f],
                                         config.phoneme_recipe);
          });
        }
      }
    }
    runner(jobs);
    for (auto seed : seeds) {
      std::map<int, ConfusionMatrix> per_speaker;
      for (int s : source_speakers) {
        std::vector<SequencePair> all;
        for (auto& p : pairs[{seed, s}]) all.insert(all.end(), p.begin(), p.end());
        per_speaker.emplace(s, accumulate_confusions(all, Inventory::standard()));
      }
      for (const auto& n : sources) {
        std::vector<ConfusionMatrix> parts;
        for (int s : n) parts.push_back(per_speaker.at(s));
        result.maps[seed][map_designation(n)] =
            cluster(merge_confusions(parts), map_designation(n));
      }
    }
  } else {
    for (auto seed : seeds) {
      for (const auto& [designation, cm] : fixture_confusions) {
        result.maps[seed][designation] = cluster(cm, designation);
      }
    }
  }

  // One job per (seed, map source, train speaker, fold): train once, decode
  // every test speaker that shares those models.
  for (auto seed : seeds) {
    for (const auto& spec : specs) {
      for (int f = 1; f <= k; ++f) {
        FoldRecord r;
        r.seed = seed;
        r.spec = spec;
        r.result.fold = f;
        result.folds.push_back(std::move(r));
      }
    }
  }
  std::sort(result.folds.begin(), result.folds.end(),
            [](const FoldRecord& a, const FoldRecord& b) { return record_key(a) < record_key(b); });

  using JobKey = std::tuple<std::uint64_t, SpeakerSet, int, int>;
  std::map<JobKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < result.folds.size(); ++i) {
    const auto& r = result.folds[i];
    groups[{r.seed, r.spec.map_source, r.spec.train_speaker, r.result.fold}].push_back(i);
  }
  std::vector<std::function<void()>> jobs;
  for (const auto& [key, slots] : groups) {
    jobs.emplace_back([&, key, slots] {
      const auto& [seed, n, p, f] = key;
      const auto& map = result.maps.at(seed).at(map_designation(n));
      const auto& train = corpora.at(seed).at(p);
      const auto& train_fold = folds.at(seed).at(p)[static_cast<std::size_t>(f - 1)];
      const auto rec = train_words(map, train, train_fold, config.word_recipe);
      for (auto i : slots) {
        auto& record = result.folds[i];
        const int q = record.spec.test_speaker;
        const auto& test_fold = folds.at(seed).at(q)[static_cast<std::size_t>(f - 1)];
        record.result = decode_fold(rec, corpora.at(seed).at(q), test_fold, &record.outcomes);
      }
    });
  }
  runner(jobs);
  return result;
}

void write_study(const StudyResult& result, const std::string& dir) {
  for (const auto& record : result.folds) {
    const auto path = fs::path(dir) / fold_record_filename(record);
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << fold_record_to_json(record).dump(2) << '\n';
    if (!out) throw Error("cannot write " + path.string());
  }
  for (const auto& [seed, maps] : result.maps) {
    const auto map_dir = fs::path(dir) / ("seed" + std::to_string(seed)) / "maps";
    fs::create_directories(map_dir);
    for (const auto& [designation, map] : maps) {
      std::ofstream out(map_dir / (designation + ".json"), std::ios::binary);
      out << serialize_map(map);
    }
  }
}

StudyResult read_study(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("results directory " + dir + " does not exist");
  StudyResult result;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const auto rel = fs::relative(path, dir);
    auto it = rel.begin();
    if (it == rel.end() || it->string().rfind("seed", 0) != 0) continue;
    if (std::distance(rel.begin(), rel.end()) != 3 || path.extension() != ".json") continue;
    const std::uint64_t seed = std::stoull(it->string().substr(4));
    ++it;
    if (it->string() == "maps") {
      auto map = load_map(path.string());
      result.maps[seed][map.designation] = std::move(map);
    } else {
      json doc;
      try {
        doc = json::parse(read_file(path));
      } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
      }
      result.folds.push_back(fold_record_from_json(doc));
    }
  }
  std::sort(result.folds.begin(), result.folds.end(),
            [](const FoldRecord& a, const FoldRecord& b) { return record_key(a) < record_key(b); });
  return result;
}

}  // namespace visemelab
