// visemelab: command-line front end. Exit codes: 0 ok, 1 runtime failure,
// 2 usage or configuration error.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "visemelab/alignment.hpp"
#include "visemelab/clustering.hpp"
#include "visemelab/error.hpp"
#include "visemelab/harness.hpp"
#include "visemelab/hmm.hpp"
#include "visemelab/lexicon.hpp"
#include "visemelab/recipe.hpp"
#include "visemelab/report.hpp"
#include "visemelab/study.hpp"
#include "visemelab/synth.hpp"
#include "visemelab/translation.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace visemelab;

namespace {

struct Options {
  bool json = false;
  std::string confusions, map_path, out, lexicon_path, corpus, models, config, results;
  std::string designation, format = "vlf";
  std::vector<std::string> words, families;
  std::uint64_t seed = 0;
  int speaker = 1, recitations = 7, iterations = 11, states = 3, mixtures = 5;
  int recitation = 0, workers = 0;
  std::size_t dimension = 10;
  double delta = 0;
};

void print_json(const ordered_json& doc) { std::cout << doc.dump(2) << '\n'; }

Lexicon lexicon_for(const Options& o) {
  return o.lexicon_path.empty() ? bundled_lexicon() : load_lexicon(o.lexicon_path);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

// Fixed pool; jobs pick work in index order, results land in job-owned slots.
JobRunner thread_pool(int workers) {
  return [workers](std::vector<std::function<void()>>& jobs) {
    const int n = std::min<int>(workers, static_cast<int>(jobs.size()));
    if (n <= 1) return run_serial(jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    for (int w = 0; w < n; ++w) {
      threads.emplace_back([&] {
        for (std::size_t i; (i = next++) < jobs.size();) {
          try {
            jobs[i]();
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  };
}

RecipeConfig recipe_for(const Options& o) {
  RecipeConfig r;
  r.states = o.states;
  r.iterations = o.iterations;
  if (o.mixtures < 1) throw ConfigError("--mixtures must be positive");
  // Follow the default growth steps, capped at the requested size.
  std::vector<std::pair<int, int>> schedule;
  for (auto [after, target] : r.split_schedule) {
    if (o.mixtures <= 1) break;
    schedule.emplace_back(after, std::min(target, o.mixtures));
    if (target >= o.mixtures) break;
  }
  r.split_schedule = schedule;
  return r;
}

int cmd_cluster(const Options& o) {
  const auto cm = load_confusions_csv(o.confusions);
  const auto designation =
      o.designation.empty() ? fs::path(o.confusions).stem().string() : o.designation;
  const auto map = cluster(cm, designation);
  if (!o.out.empty()) write_text(o.out, serialize_map(map));
  if (o.json) {
    print_json(ordered_json::parse(serialize_map(map)));
    return 0;
  }
  std::cout << designation << '\n';
  for (const auto& v : map.visemes) {
    std::cout << "  " << v.label << "  " << join(std::vector<std::string>(v.phonemes.begin(), v.phonemes.end()))
              << '\n';
  }
  if (!map.garb.empty()) {
    std::cout << "  garb  " << join(std::vector<std::string>(map.garb.begin(), map.garb.end())) << '\n';
  }
  std::cout << "  sil   sil\n";
  return 0;
}

int cmd_translate(const Options& o) {
  const auto lexicon = lexicon_for(o);
  const auto map = load_map(o.map_path);
  ordered_json doc = ordered_json::object();
  for (const auto& word : o.words) {
    if (!lexicon.contains(word)) throw ConfigError("word '" + word + "' is not in the lexicon");
    std::vector<std::string> strings;
    for (const auto& pron : lexicon.pronunciations(word)) {
      auto s = join(apply_map(pron, map));
      if (std::find(strings.begin(), strings.end(), s) == strings.end()) strings.push_back(s);
    }
    if (o.json) {
      doc[word] = strings;
    } else {
      for (const auto& s : strings) std::cout << word << '\t' << s << '\n';
    }
  }
  if (o.json) print_json(doc);
  return 0;
}

int cmd_homophones(const Options& o) {
  const auto lexicon = lexicon_for(o);
  const auto map = load_map(o.map_path);
  const auto h = homophone_analysis(lexicon, map);
  if (o.json) {
    print_json({{"map", map.designation},
                {"words", lexicon.size()},
                {"T", h.unique_words},
                {"collisions", h.collisions()}});
    return 0;
  }
  std::cout << "T = " << h.unique_words << '\n';
  for (const auto& group : h.collisions()) std::cout << "  " << join(group) << '\n';
  return 0;
}

int cmd_synth(const Options& o) {
  const auto lexicon = lexicon_for(o);
  auto profile = make_speaker(o.speaker, o.dimension, o.seed);
  if (o.delta > 0) profile = perturb_speaker(profile, o.delta, o.seed);
  const auto corpus = generate_corpus(profile, lexicon, o.recitations, o.seed);
  write_corpus(corpus, o.out, o.format);
  std::cout << "wrote " << corpus.utterances.size() << " utterances to " << o.out << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  const auto lexicon = lexicon_for(o);
  const auto corpus = read_corpus(o.corpus);
  const auto map = load_map(o.map_path);
  const auto recipe = recipe_for(o);
  std::vector<TrainingItem> items;
  for (const auto& u : corpus.utterances) {
    if (o.recitation && u.recitation == o.recitation) continue;  // held out
    items.push_back({&u.features, word_variants(lexicon, u.word, map)});
  }
  const auto result = train_recipe(items, map.model_labels(), recipe);
  save_model_set(o.out, result.models);
  for (const auto& flag : result.flags) std::cerr << "note: " << flag << '\n';
  std::cout << "trained " << result.models.models().size() << " models on " << items.size()
            << " utterances; final log-likelihood " << result.log_likelihood.back() << '\n';
  return 0;
}

int cmd_decode(const Options& o) {
  const auto lexicon = lexicon_for(o);
  const auto corpus = read_corpus(o.corpus);
  const auto map = load_map(o.map_path);
  const auto models = load_model_set(o.models);
  const auto network = build_word_network(lexicon, map);
  int classified = 0, correct = 0;
  ordered_json outcomes = ordered_json::array();
  for (const auto& u : corpus.utterances) {
    if (o.recitation && u.recitation != o.recitation) continue;
    const auto d = viterbi_decode(models, network, u.features);
    ++classified;
    correct += d.word == u.word;
    if (o.json) {
      outcomes.push_back({{"recitation", u.recitation}, {"word", u.word}, {"recognised", d.word}});
    } else {
      std::cout << u.recitation << '\t' << u.word << '\t' << d.word << '\n';
    }
  }
  const double c = classified ? static_cast<double>(correct) / classified : 0.0;
  if (o.json) {
    print_json({{"classified", classified}, {"correct", correct}, {"correctness", c}, {"outcomes", outcomes}});
  } else {
    std::cout << "correct " << correct << " / " << classified << '\n';
  }
  return 0;
}

void emit_report(const Report& report, const Options& o) {
  if (o.json) {
    print_json(report_to_json(report));
  } else {
    std::cout << render_report(report);
  }
}

int cmd_experiment(const Options& o) {
  auto config = load_study_config(o.config);
  if (!o.families.empty()) {
    config.families.clear();
    for (const auto& f : o.families) config.families.push_back(parse_family(f));
    std::sort(config.families.begin(), config.families.end());
    config.families.erase(std::unique(config.families.begin(), config.families.end()),
                          config.families.end());
  }
  const int workers = o.workers > 0 ? o.workers
                                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto result = run_study(config, thread_pool(workers));
  write_study(result, o.out);
  write_text(fs::path(o.out) / "config.json", study_config_to_json(config).dump(2) + "\n");
  const auto report = build_report(result);
  write_text(fs::path(o.out) / "report.json", report_to_json(report).dump(2) + "\n");
  write_text(fs::path(o.out) / "report.txt", render_report(report));
  emit_report(report, o);
  return 0;
}

int cmd_report(const Options& o) {
  emit_report(build_report(read_study(o.results)), o);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phoneme-to-viseme map derivation and evaluation"};
  app.require_subcommand(1);
  Options o;
  int (*handler)(const Options&) = nullptr;

  auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->callback([&handler, fn] { handler = fn; });
    return sub;
  };
  auto lexicon_opt = [&](CLI::App* sub) {
    sub->add_option("--lexicon", o.lexicon_path, "Pronunciation dictionary (default: bundled A-Z)")
        ->check(CLI::ExistingFile);
  };

  auto* cluster_cmd = add("cluster", "Derive a map from a confusion matrix CSV", cmd_cluster);
  cluster_cmd->add_option("confusions", o.confusions, "Confusion matrix CSV")
      ->required()
      ->check(CLI::ExistingFile);
  cluster_cmd->add_option("--out", o.out, "Write the map JSON here");
  cluster_cmd->add_option("--designation", o.designation, "Map name (default: file stem)");
  cluster_cmd->add_flag("--json", o.json, "Print the map as JSON");

  auto* translate_cmd = add("translate", "Translate words to viseme strings", cmd_translate);
  translate_cmd->add_option("words", o.words, "Words to translate")->required();
  translate_cmd->add_option("--map", o.map_path, "Map JSON")->required()->check(CLI::ExistingFile);
  translate_cmd->add_flag("--json", o.json, "JSON output");
  lexicon_opt(translate_cmd);

  auto* homophones_cmd = add("homophones", "Count distinct words under a map", cmd_homophones);
  homophones_cmd->add_option("--map", o.map_path, "Map JSON")->required()->check(CLI::ExistingFile);
  homophones_cmd->add_flag("--json", o.json, "JSON output");
  lexicon_opt(homophones_cmd);

  auto* synth_cmd = add("synth", "Generate a synthetic speaker corpus", cmd_synth);
  synth_cmd->add_option("--out", o.out, "Corpus directory")->required();
  synth_cmd->add_option("--seed", o.seed, "Random seed")->required();
  synth_cmd->add_option("--speaker", o.speaker, "Speaker id")->check(CLI::Range(1, 99));
  synth_cmd->add_option("--recitations", o.recitations, "Recitations of the lexicon")
      ->check(CLI::Range(1, 1000));
  synth_cmd->add_option("--dimension", o.dimension, "Feature dimension")->check(CLI::Range(1, 1000));
  synth_cmd->add_option("--delta", o.delta, "Shift from the base speaker, in stddevs")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--format", o.format, "Feature files: vlf or csv")
      ->check(CLI::IsMember({"vlf", "csv"}));
  lexicon_opt(synth_cmd);

  auto* train_cmd = add("train", "Train word-level viseme HMMs on a corpus", cmd_train);
  train_cmd->add_option("--corpus", o.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--map", o.map_path, "Map JSON")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", o.out, "Model set JSON")->required();
  train_cmd->add_option("--holdout", o.recitation, "Recitation to leave out");
  train_cmd->add_option("--iterations", o.iterations, "Re-estimations")->check(CLI::Range(1, 1000));
  train_cmd->add_option("--states", o.states, "States per model")->check(CLI::Range(1, 20));
  train_cmd->add_option("--mixtures", o.mixtures, "Final mixture components")->check(CLI::Range(1, 64));
  lexicon_opt(train_cmd);

  auto* decode_cmd = add("decode", "Recognise corpus utterances with trained models", cmd_decode);
  decode_cmd->add_option("--corpus", o.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  decode_cmd->add_option("--map", o.map_path, "Map JSON")->required()->check(CLI::ExistingFile);
  decode_cmd->add_option("--models", o.models, "Model set JSON")->required()->check(CLI::ExistingFile);
  decode_cmd->add_option("--recitation", o.recitation, "Only decode this recitation");
  decode_cmd->add_flag("--json", o.json, "JSON output");
  lexicon_opt(decode_cmd);

  auto* experiment_cmd = add("experiment", "Run cross-validated experiment families", cmd_experiment);
  experiment_cmd->add_option("--config", o.config, "Study config JSON")->required()->check(CLI::ExistingFile);
  experiment_cmd->add_option("--out", o.out, "Results directory")->required();
  experiment_cmd->add_option("--family", o.families, "Restrict to these families (SSD, DSD&D, DSD, MS, SI)");
  experiment_cmd->add_option("--workers", o.workers, "Parallel jobs (default: available cores)")
      ->check(CLI::Range(1, 1024));
  experiment_cmd->add_flag("--json", o.json, "Print the report as JSON");

  auto* report_cmd = add("report", "Summarise a results directory", cmd_report);
  report_cmd->add_option("--results", o.results, "Results directory")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_flag("--json", o.json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return handler(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
