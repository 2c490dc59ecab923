#ifndef VISEMELAB_HMM_HPP_
#define VISEMELAB_HMM_HPP_

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "visemelab/features.hpp"

namespace visemelab {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without leaving log space.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

struct GaussianComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> variance;  // diagonal
};

// Diagonal-covariance Gaussian mixture. Normalising constants are cached and
// refreshed whenever components change.
class GaussianMixture {
 public:
  GaussianMixture() = default;
  explicit GaussianMixture(std::vector<GaussianComponent> components);

  const std::vector<GaussianComponent>& components() const { return components_; }
  void set_components(std::vector<GaussianComponent> components);
  std::size_t size() const { return components_.size(); }
  std::size_t dimension() const;

  double log_likelihood(std::span<const double> x) const;
  // log(w_m) + log N_m(x) for every component m.
  void component_log_likelihoods(std::span<const double> x, std::span<double> out) const;

 private:
  void refresh();

  std::vector<GaussianComponent> components_;
  std::vector<double> log_const_;
  std::vector<double> inv_var_;
};

struct HmmState {
  GaussianMixture mixture;
  double self_loop = 0.5;  // advance probability is 1 - self_loop
};

// Left-to-right model: entry -> s1 -> ... -> sN -> exit, self loops only.
struct HmmModel {
  std::string label;
  std::vector<HmmState> states;

  // (N+2)x(N+2) matrix over {entry, emitting states, exit}; exit row is zero.
  std::vector<std::vector<double>> transition_matrix() const;
};

class ModelSet {
 public:
  ModelSet() = default;
  ModelSet(std::size_t dimension, std::vector<double> variance_floor);

  std::size_t dimension() const { return dimension_; }
  const std::vector<double>& variance_floor() const { return variance_floor_; }

  void add(HmmModel model);
  bool contains(const std::string& label) const { return index_.count(label) != 0; }
  const HmmModel& at(const std::string& label) const;
  HmmModel& at(const std::string& label);
  std::size_t index_of(const std::string& label) const;
  const std::vector<HmmModel>& models() const { return models_; }
  std::vector<HmmModel>& models() { return models_; }
  std::vector<std::string> labels() const;

 private:
  std::size_t dimension_ = 0;
  std::vector<double> variance_floor_;
  std::vector<HmmModel> models_;
  std::map<std::string, std::size_t> index_;
};

nlohmann::ordered_json model_set_to_json(const ModelSet& models);
ModelSet model_set_from_json(const nlohmann::json& doc);
void save_model_set(const std::string& path, const ModelSet& models);
ModelSet load_model_set(const std::string& path);

// Structural checks: row-stochastic transitions, normalised weights,
// variances above the floor. Empty when everything holds to `tolerance`.
std::vector<std::string> check_model_set(const ModelSet& models, double tolerance = 1e-9);

// Global-statistics initialisation (population variance); every label gets
// an identical model. Throws ModelError for a zero-variance dimension.
ModelSet flat_start(std::span<const FeatureSequence> corpus,
                    std::span<const std::string> labels, int states = 3,
                    int mixtures = 1, double variance_floor_scale = 1e-4);

// Per-utterance log emission table for a subset of labels.
class EmissionCache {
 public:
  EmissionCache(const ModelSet& models, const FeatureSequence& seq,
                std::span<const std::string> labels);
  EmissionCache(const ModelSet& models, const FeatureSequence& seq);

  std::size_t frames() const { return frames_; }
  // log b for (model index, state) at frame t.
  const double* row(std::size_t model, std::size_t state) const;

 private:
  void fill(const ModelSet& models, const FeatureSequence& seq, std::size_t model);

  std::size_t frames_ = 0;
  std::vector<std::vector<double>> rows_;  // per model: states * frames
  std::vector<std::size_t> states_;
};

// Concatenation of unit models along a transcription.
struct CompositeChain {
  std::vector<std::size_t> model;    // per composite state
  std::vector<std::size_t> state;    // state index inside its model
  std::vector<double> log_self;
  std::vector<double> log_advance;
  std::vector<const double*> emission;

  std::size_t size() const { return model.size(); }
};

CompositeChain make_chain(const ModelSet& models, const EmissionCache& cache,
                          std::span<const std::string> transcription);

double forward_log_likelihood(const CompositeChain& chain, std::size_t frames);
double forward_log_likelihood(const ModelSet& models, const FeatureSequence& seq,
                              std::span<const std::string> transcription);

struct Segment {
  std::string label;
  std::size_t begin = 0;  // first frame
  std::size_t end = 0;    // one past the last frame
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct ForcedAlignment {
  double log_likelihood = kLogZero;
  std::vector<Segment> segments;
  std::vector<std::size_t> state_path;  // composite state per frame
};

// Viterbi path through the transcription's composite model. Throws
// ModelError when the sequence is shorter than the number of states.
ForcedAlignment force_align(const ModelSet& models, const FeatureSequence& seq,
                            std::span<const std::string> transcription);
double viterbi_log_likelihood(const CompositeChain& chain, std::size_t frames);

struct WordEntry {
  std::string word;
  std::vector<std::vector<std::string>> variants;  // model label sequences
};

struct WordNetwork {
  std::vector<WordEntry> words;
};

struct DecodeResult {
  std::string word;
  double log_likelihood = kLogZero;
  std::size_t variant = 0;
};

// Best word over all variants; exact score ties go to the smaller word.
DecodeResult viterbi_decode(const ModelSet& models, const WordNetwork& network,
                            const FeatureSequence& seq);

// Free phone loop: any label may follow any other, each entry costing
// log(1/labels). Returns the best label sequence.
std::vector<std::string> decode_label_loop(const ModelSet& models,
                                           std::span<const std::string> labels,
                                           const FeatureSequence& seq);

struct TrainingExample {
  const FeatureSequence* features = nullptr;
  std::vector<std::string> transcription;
};

struct BaumWelchResult {
  std::vector<double> log_likelihood;  // corpus total before each update
  std::vector<std::string> flags;      // states left untouched, skipped utterances
};

// Embedded re-estimation over composite models.
BaumWelchResult baum_welch(ModelSet& models, std::span<const TrainingExample> corpus,
                           int iterations);

// Grow every state to `target` components by splitting the heaviest one
// (weight halved, means moved +-0.2 standard deviations).
void split_mixtures(ModelSet& models, std::size_t target);

}  // namespace visemelab

#endif  // VISEMELAB_HMM_HPP_
