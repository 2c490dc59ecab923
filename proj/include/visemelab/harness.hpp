#ifndef VISEMELAB_HARNESS_HPP_
#define VISEMELAB_HARNESS_HPP_

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "visemelab/synth.hpp"

namespace visemelab {

enum class Family { kSSD, kDSDD, kDSD, kMS, kSI };

std::string to_string(Family family);
Family parse_family(std::string_view name);  // accepts "SSD", "DSD&D", "DSDD", ...
std::vector<Family> all_families();

using SpeakerSet = std::set<int>;

// M_n(p, q): map from speakers n, models trained on p, tested on q.
struct ExperimentSpec {
  SpeakerSet map_source;
  int train_speaker = 0;
  int test_speaker = 0;
  Family family = Family::kSSD;

  std::string name() const;  // e.g. "M_234(1,1)"
  friend auto operator<=>(const ExperimentSpec&, const ExperimentSpec&) = default;
};

std::string map_designation(const SpeakerSet& speakers);  // {2,3,4} -> "M_234"

// Family of (n, p, q) over speakers 1..speaker_count, or nullopt when the
// triple is not one of the five designs.
std::optional<Family> classify(const SpeakerSet& map_source, int train, int test,
                               int speaker_count);

// Specs of one family, ordered by test speaker then map source.
std::vector<ExperimentSpec> family_specs(Family family, int speaker_count);

struct Fold {
  int recitation = 0;  // held-out recitation, 1-based
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Fold i holds out recitation i. Throws ConfigError when the corpus does not
// have exactly k recitations.
std::vector<Fold> crossval_folds(const Corpus& corpus, int k = 7);

struct FoldResult {
  int fold = 0;
  int classified = 0;
  int correct = 0;

  double correctness() const {
    return classified ? static_cast<double>(correct) / classified : 0.0;
  }
  friend bool operator==(const FoldResult&, const FoldResult&) = default;
};

struct Correctness {
  double mean = 0;
  double standard_error = 0;  // sample stddev / sqrt(n)
  friend bool operator==(const Correctness&, const Correctness&) = default;
};

Correctness correctness(std::span<const FoldResult> folds);
Correctness summarize(std::span<const double> values);

// +-1 inside the baseline's error bar, +-2 beyond it, 0 for exact ties.
int weighted_score(double dsd, const Correctness& baseline);

struct ScoreMatrix {
  std::vector<int> speakers;  // rows: the speaker trained and tested on
  std::vector<int> maps;      // columns: the speaker the map came from
  std::vector<std::vector<int>> scores;
  std::vector<int> totals;

  // Map speakers ordered by total, best first (ties: smaller id).
  std::vector<int> ranking() const;
  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;
};

// `dsd[{n, p}]` is the correctness of M_n(p,p); `ssd[p]` the baseline of
// speaker p.
ScoreMatrix weighted_scores(const std::map<std::pair<int, int>, double>& dsd,
                            const std::map<int, Correctness>& ssd);

}  // namespace visemelab

#endif  // VISEMELAB_HARNESS_HPP_
