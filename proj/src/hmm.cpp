#include "visemelab/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "visemelab/error.hpp"

namespace visemelab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kMinSelfLoop = 1e-3;
constexpr double kMinWeight = 1e-5;
constexpr double kMinOccupancy = 1e-6;

}  // namespace

// ---------------------------------------------------------------------------
// GaussianMixture

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components) {
  set_components(std::move(components));
}

void GaussianMixture::set_components(std::vector<GaussianComponent> components) {
  components_ = std::move(components);
  refresh();
}

std::size_t GaussianMixture::dimension() const {
  return components_.empty() ? 0 : components_.front().mean.size();
}

void GaussianMixture::refresh() {
  const std::size_t dim = dimension();
  log_const_.assign(components_.size(), 0.0);
  inv_var_.assign(components_.size() * dim, 0.0);
  for (std::size_t m = 0; m < components_.size(); ++m) {
    const auto& c = components_[m];
    if (c.mean.size() != dim || c.variance.size() != dim) {
      throw ModelError("mixture components disagree on dimension");
    }
    double log_det = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      if (!(c.variance[d] > 0)) throw ModelError("nonpositive variance");
      log_det += std::log(c.variance[d]);
      inv_var_[m * dim + d] = 1.0 / c.variance[d];
    }
    log_const_[m] = std::log(c.weight) - 0.5 * (dim * kLog2Pi + log_det);
  }
}

void GaussianMixture::component_log_likelihoods(std::span<const double> x,
                                                std::span<double> out) const {
  const std::size_t dim = dimension();
  for (std::size_t m = 0; m < components_.size(); ++m) {
    const double* mean = components_[m].mean.data();
    const double* iv = inv_var_.data() + m * dim;
    double q = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = x[d] - mean[d];
      q += diff * diff * iv[d];
    }
    out[m] = log_const_[m] - 0.5 * q;
  }
}

double GaussianMixture::log_likelihood(std::span<const double> x) const {
  double buf[64];
  std::vector<double> heap;
  double* ll = buf;
  if (components_.size() > 64) {
    heap.resize(components_.size());
    ll = heap.data();
  }
  component_log_likelihoods(x, {ll, components_.size()});
  double total = kLogZero;
  for (std::size_t m = 0; m < components_.size(); ++m) total = log_add(total, ll[m]);
  return total;
}

// ---------------------------------------------------------------------------
// Models

std::vector<std::vector<double>> HmmModel::transition_matrix() const {
  const std::size_t n = states.size() + 2;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  a[0][1] = 1.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    a[s + 1][s + 1] = states[s].self_loop;
    a[s + 1][s + 2] = 1.0 - states[s].self_loop;
  }
  return a;
}

ModelSet::ModelSet(std::size_t dimension, std::vector<double> variance_floor)
    : dimension_(dimension), variance_floor_(std::move(variance_floor)) {
  if (variance_floor_.size() != dimension_) {
    throw ModelError("variance floor does not match the feature dimension");
  }
}

void ModelSet::add(HmmModel model) {
  if (index_.count(model.label)) throw ModelError("duplicate model " + model.label);
  if (model.states.empty()) throw ModelError("model " + model.label + " has no states");
  index_[model.label] = models_.size();
  models_.push_back(std::move(model));
}

std::size_t ModelSet::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw ModelError("no model for label '" + label + "'");
  return it->second;
}

const HmmModel& ModelSet::at(const std::string& label) const {
  return models_[index_of(label)];
}

HmmModel& ModelSet::at(const std::string& label) { return models_[index_of(label)]; }

std::vector<std::string> ModelSet::labels() const {
  std::vector<std::string> out;
  for (const auto& m : models_) out.push_back(m.label);
  return out;
}

nlohmann::ordered_json model_set_to_json(const ModelSet& models) {
  nlohmann::ordered_json doc;
  doc["dimension"] = models.dimension();
  doc["variance_floor"] = models.variance_floor();
  doc["models"] = nlohmann::ordered_json::array();
  for (const auto& m : models.models()) {
    nlohmann::ordered_json jm;
    jm["label"] = m.label;
    jm["transitions"] = m.transition_matrix();
    jm["states"] = nlohmann::ordered_json::array();
    for (const auto& s : m.states) {
      nlohmann::ordered_json js = nlohmann::ordered_json::array();
      for (const auto& c : s.mixture.components()) {
        js.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
      }
      jm["states"].push_back({{"mixture", js}});
    }
    doc["models"].push_back(std::move(jm));
  }
  return doc;
}

ModelSet model_set_from_json(const nlohmann::json& doc) {
  try {
    ModelSet models(doc.at("dimension").get<std::size_t>(),
                    doc.at("variance_floor").get<std::vector<double>>());
    for (const auto& jm : doc.at("models")) {
      HmmModel m;
      m.label = jm.at("label").get<std::string>();
      const auto trans = jm.at("transitions").get<std::vector<std::vector<double>>>();
      const auto& js = jm.at("states");
      if (trans.size() != js.size() + 2) {
        throw ParseError("transition matrix size mismatch in model " + m.label);
      }
      for (std::size_t s = 0; s < js.size(); ++s) {
        std::vector<GaussianComponent> comps;
        for (const auto& jc : js[s].at("mixture")) {
          comps.push_back({jc.at("weight").get<double>(),
                           jc.at("mean").get<std::vector<double>>(),
                           jc.at("variance").get<std::vector<double>>()});
        }
        m.states.push_back({GaussianMixture(std::move(comps)), trans[s + 1][s + 1]});
      }
      models.add(std::move(m));
    }
    return models;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model document: ") + e.what());
  }
}

void save_model_set(const std::string& path, const ModelSet& models) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write models '" + path + "'");
  out << model_set_to_json(models).dump(1) << '\n';
}

ModelSet load_model_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open models '" + path + "'");
  try {
    return model_set_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model document: ") + e.what());
  }
}

std::vector<std::string> check_model_set(const ModelSet& models, double tolerance) {
  std::vector<std::string> problems;
  const auto& floor = models.variance_floor();
  for (const auto& m : models.models()) {
    const auto a = m.transition_matrix();
    for (std::size_t r = 0; r + 1 < a.size(); ++r) {
      double sum = 0;
      for (std::size_t c = 0; c < a.size(); ++c) {
        if (a[r][c] < 0) problems.push_back(m.label + ": negative transition");
        if (c < r && a[r][c] != 0) problems.push_back(m.label + ": backward transition");
        if (c > r + 1 && a[r][c] != 0) problems.push_back(m.label + ": skip transition");
        sum += a[r][c];
      }
      if (std::abs(sum - 1.0) > tolerance) {
        problems.push_back(m.label + ": transition row " + std::to_string(r) +
                           " sums to " + std::to_string(sum));
      }
    }
    for (std::size_t s = 0; s < m.states.size(); ++s) {
      double wsum = 0;
      for (const auto& c : m.states[s].mixture.components()) {
        if (!(c.weight > 0)) problems.push_back(m.label + ": nonpositive weight");
        wsum += c.weight;
        for (std::size_t d = 0; d < c.variance.size(); ++d) {
          if (c.variance[d] < floor[d] * (1 - 1e-12)) {
            problems.push_back(m.label + ": variance below floor");
          }
        }
      }
      if (std::abs(wsum - 1.0) > tolerance) {
        problems.push_back(m.label + ": weights of state " + std::to_string(s) +
                           " sum to " + std::to_string(wsum));
      }
    }
  }
  return problems;
}

ModelSet flat_start(std::span<const FeatureSequence> corpus,
                    std::span<const std::string> labels, int states, int mixtures,
                    double variance_floor_scale) {
  if (corpus.empty()) throw ModelError("flat start needs a nonempty corpus");
  if (states < 1 || mixtures < 1) throw ModelError("states and mixtures must be positive");
  const std::size_t dim = corpus.front().dimension();
  std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
  double n = 0;
  for (const auto& seq : corpus) {
    if (seq.dimension() != dim) throw ModelError("corpus mixes feature dimensions");
    for (std::size_t t = 0; t < seq.frames(); ++t) {
      auto f = seq.frame(t);
      for (std::size_t d = 0; d < dim; ++d) {
        sum[d] += f[d];
        sumsq[d] += f[d] * f[d];
      }
    }
    n += static_cast<double>(seq.frames());
  }
  if (n == 0) throw ModelError("flat start corpus has no frames");
  std::vector<double> mean(dim), var(dim), floor(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    mean[d] = sum[d] / n;
    var[d] = sumsq[d] / n - mean[d] * mean[d];
    if (!(var[d] > 0)) {
      throw ModelError("degenerate corpus: dimension " + std::to_string(d) +
                       " has zero variance");
    }
    floor[d] = variance_floor_scale * var[d];
  }

  ModelSet models(dim, floor);
  for (const auto& label : labels) {
    HmmModel m;
    m.label = label;
    for (int s = 0; s < states; ++s) {
      m.states.push_back({GaussianMixture({{1.0, mean, var}}), 0.5});
    }
    models.add(std::move(m));
  }
  if (mixtures > 1) split_mixtures(models, static_cast<std::size_t>(mixtures));
  return models;
}

// ---------------------------------------------------------------------------
// Emissions and composite chains

EmissionCache::EmissionCache(const ModelSet& models, const FeatureSequence& seq,
                             std::span<const std::string> labels)
    : frames_(seq.frames()), rows_(models.models().size()), states_(models.models().size()) {
  if (seq.dimension() != models.dimension()) {
    throw ModelError("feature dimension " + std::to_string(seq.dimension()) +
                     " does not match models (" + std::to_string(models.dimension()) + ")");
  }
  for (const auto& label : labels) {
    const std::size_t k = models.index_of(label);
    if (rows_[k].empty()) fill(models, seq, k);
  }
}

EmissionCache::EmissionCache(const ModelSet& models, const FeatureSequence& seq)
    : EmissionCache(models, seq, models.labels()) {}

void EmissionCache::fill(const ModelSet& models, const FeatureSequence& seq,
                         std::size_t k) {
  const auto& m = models.models()[k];
  states_[k] = m.states.size();
  rows_[k].resize(m.states.size() * frames_);
  for (std::size_t s = 0; s < m.states.size(); ++s) {
    double* out = rows_[k].data() + s * frames_;
    for (std::size_t t = 0; t < frames_; ++t) {
      out[t] = m.states[s].mixture.log_likelihood(seq.frame(t));
    }
  }
}

const double* EmissionCache::row(std::size_t model, std::size_t state) const {
  if (rows_[model].empty()) throw ModelError("emission row was not cached");
  return rows_[model].data() + state * frames_;
}

CompositeChain make_chain(const ModelSet& models, const EmissionCache& cache,
                          std::span<const std::string> transcription) {
  if (transcription.empty()) throw ModelError("empty transcription");
  CompositeChain chain;
  for (const auto& label : transcription) {
    const std::size_t k = models.index_of(label);
    const auto& m = models.models()[k];
    for (std::size_t s = 0; s < m.states.size(); ++s) {
      chain.model.push_back(k);
      chain.state.push_back(s);
      chain.log_self.push_back(std::log(m.states[s].self_loop));
      chain.log_advance.push_back(std::log1p(-m.states[s].self_loop));
      chain.emission.push_back(cache.row(k, s));
    }
  }
  return chain;
}

namespace {

// alpha laid out [t * S + s].
double forward_pass(const CompositeChain& c, std::size_t frames, std::vector<double>& alpha) {
  const std::size_t S = c.size();
  alpha.assign(frames * S, kLogZero);
  if (frames < S) return kLogZero;
  alpha[0] = c.emission[0][0];
  for (std::size_t t = 1; t < frames; ++t) {
    const double* prev = alpha.data() + (t - 1) * S;
    double* cur = alpha.data() + t * S;
    // States further than t steps in, or too far to still reach the end, are
    // unreachable.
    const std::size_t hi = std::min(S - 1, t);
    const std::size_t lo = (frames - t <= S) ? S - (frames - t) : 0;
    for (std::size_t s = lo; s <= hi; ++s) {
      double v = prev[s] + c.log_self[s];
      if (s > 0) v = log_add(v, prev[s - 1] + c.log_advance[s - 1]);
      cur[s] = v + c.emission[s][t];
    }
  }
  return alpha[(frames - 1) * S + S - 1] + c.log_advance[S - 1];
}

void backward_pass(const CompositeChain& c, std::size_t frames, std::vector<double>& beta) {
  const std::size_t S = c.size();
  beta.assign(frames * S, kLogZero);
  beta[(frames - 1) * S + S - 1] = c.log_advance[S - 1];
  for (std::size_t t = frames - 1; t-- > 0;) {
    const double* next = beta.data() + (t + 1) * S;
    double* cur = beta.data() + t * S;
    for (std::size_t s = 0; s < S; ++s) {
      double v = c.log_self[s] + c.emission[s][t + 1] + next[s];
      if (s + 1 < S) {
        v = log_add(v, c.log_advance[s] + c.emission[s + 1][t + 1] + next[s + 1]);
      }
      cur[s] = v;
    }
  }
}

}  // namespace

double forward_log_likelihood(const CompositeChain& chain, std::size_t frames) {
  std::vector<double> alpha;
  return forward_pass(chain, frames, alpha);
}

double forward_log_likelihood(const ModelSet& models, const FeatureSequence& seq,
                              std::span<const std::string> transcription) {
  EmissionCache cache(models, seq, transcription);
  return forward_log_likelihood(make_chain(models, cache, transcription), seq.frames());
}

namespace {

double viterbi_pass(const CompositeChain& c, std::size_t frames,
                    std::vector<std::size_t>* path) {
  const std::size_t S = c.size();
  if (frames < S || S == 0) return kLogZero;
  std::vector<double> prev(S, kLogZero), cur(S, kLogZero);
  std::vector<unsigned char> from_left;  // backpointer: 1 when arriving by advance
  if (path) from_left.assign(frames * S, 0);
  prev[0] = c.emission[0][0];
  for (std::size_t t = 1; t < frames; ++t) {
    std::fill(cur.begin(), cur.end(), kLogZero);
    const std::size_t hi = std::min(S - 1, t);
    const std::size_t lo = (frames - t <= S) ? S - (frames - t) : 0;
    for (std::size_t s = lo; s <= hi; ++s) {
      double stay = prev[s] + c.log_self[s];
      double adv = s > 0 ? prev[s - 1] + c.log_advance[s - 1] : kLogZero;
      // Ties keep the earlier boundary (advance wins).
      if (adv >= stay && adv != kLogZero) {
        cur[s] = adv + c.emission[s][t];
        if (path) from_left[t * S + s] = 1;
      } else {
        cur[s] = stay + c.emission[s][t];
      }
    }
    std::swap(prev, cur);
  }
  const double score = prev[S - 1] + c.log_advance[S - 1];
  if (path && score != kLogZero) {
    path->assign(frames, 0);
    std::size_t s = S - 1;
    for (std::size_t t = frames; t-- > 0;) {
      (*path)[t] = s;
      if (t > 0 && from_left[t * S + s]) --s;
    }
  }
  return score;
}

}  // namespace

double viterbi_log_likelihood(const CompositeChain& chain, std::size_t frames) {
  return viterbi_pass(chain, frames, nullptr);
}

ForcedAlignment force_align(const ModelSet& models, const FeatureSequence& seq,
                            std::span<const std::string> transcription) {
  EmissionCache cache(models, seq, transcription);
  const auto chain = make_chain(models, cache, transcription);
  ForcedAlignment out;
  out.log_likelihood = viterbi_pass(chain, seq.frames(), &out.state_path);
  if (out.log_likelihood == kLogZero) {
    throw ModelError("no admissible alignment: " + std::to_string(seq.frames()) +
                     " frames for " + std::to_string(chain.size()) + " states");
  }
  // Model boundaries: a new segment starts whenever the path enters the first
  // state of a transcription unit.
  std::size_t unit = 0;
  std::vector<std::size_t> unit_of(chain.size());
  for (std::size_t s = 0; s < chain.size(); ++s) {
    if (s > 0 && chain.state[s] == 0) ++unit;
    unit_of[s] = unit;
  }
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    const std::size_t u = unit_of[out.state_path[t]];
    if (out.segments.size() == u) {
      out.segments.push_back({transcription[u], t, t + 1});
    } else {
      out.segments.back().end = t + 1;
    }
  }
  return out;
}

DecodeResult viterbi_decode(const ModelSet& models, const WordNetwork& network,
                            const FeatureSequence& seq) {
  if (network.words.empty()) throw ModelError("empty word network");
  EmissionCache cache(models, seq);
  DecodeResult best;
  bool found = false;
  for (const auto& entry : network.words) {
    for (std::size_t v = 0; v < entry.variants.size(); ++v) {
      const auto chain = make_chain(models, cache, entry.variants[v]);
      const double score = viterbi_pass(chain, seq.frames(), nullptr);
      if (score == kLogZero) continue;
      const bool better = !found || score > best.log_likelihood ||
                          (score == best.log_likelihood && entry.word < best.word);
      if (better) {
        best = {entry.word, score, v};
        found = true;
      }
    }
  }
  if (!found) throw ModelError("no word in the network admits the sequence");
  return best;
}

std::vector<std::string> decode_label_loop(const ModelSet& models,
                                           std::span<const std::string> labels,
                                           const FeatureSequence& seq) {
  if (labels.empty()) throw ModelError("empty label loop");
  EmissionCache cache(models, seq, labels);
  // Flatten every model's states into one array.
  std::vector<std::size_t> first, model_of;
  std::vector<double> log_self, log_adv;
  std::vector<const double*> emis;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const std::size_t mi = models.index_of(labels[k]);
    const auto& m = models.models()[mi];
    first.push_back(log_self.size());
    for (std::size_t s = 0; s < m.states.size(); ++s) {
      model_of.push_back(k);
      log_self.push_back(std::log(m.states[s].self_loop));
      log_adv.push_back(std::log1p(-m.states[s].self_loop));
      emis.push_back(cache.row(mi, s));
    }
  }
  const std::size_t N = log_self.size();
  const std::size_t T = seq.frames();
  const double entry = -std::log(static_cast<double>(labels.size()));
  auto last_of = [&](std::size_t k) {
    return (k + 1 < first.size() ? first[k + 1] : N) - 1;
  };

  constexpr std::size_t kStart = static_cast<std::size_t>(-1);
  std::vector<double> prev(N, kLogZero), cur(N, kLogZero);
  std::vector<std::size_t> back(T * N, kStart);
  std::vector<unsigned char> entered(T * N, 1);
  for (std::size_t k = 0; k < labels.size(); ++k) prev[first[k]] = entry + emis[first[k]][0];
  for (std::size_t t = 1; t < T; ++t) {
    double best_exit = kLogZero;
    std::size_t best_exit_state = kStart;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const std::size_t l = last_of(k);
      const double v = prev[l] + log_adv[l];
      if (v > best_exit) {
        best_exit = v;
        best_exit_state = l;
      }
    }
    for (std::size_t i = 0; i < N; ++i) {
      double v = prev[i] + log_self[i];
      std::size_t from = i;
      bool new_unit = false;
      const bool is_first = first[model_of[i]] == i;
      if (is_first) {
        if (best_exit + entry > v) {
          v = best_exit + entry;
          from = best_exit_state;
          new_unit = true;
        }
      } else if (prev[i - 1] + log_adv[i - 1] > v) {
        v = prev[i - 1] + log_adv[i - 1];
        from = i - 1;
      }
      cur[i] = v + emis[i][t];
      back[t * N + i] = from;
      entered[t * N + i] = new_unit;
    }
    std::swap(prev, cur);
  }
  double best = kLogZero;
  std::size_t state = kStart;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const std::size_t l = last_of(k);
    if (prev[l] + log_adv[l] > best) {
      best = prev[l] + log_adv[l];
      state = l;
    }
  }
  if (state == kStart) throw ModelError("no admissible path through the label loop");
  std::vector<std::string> out;
  for (std::size_t t = T; t-- > 0;) {
    const std::size_t from = t > 0 ? back[t * N + state] : kStart;
    if (entered[t * N + state]) out.push_back(labels[model_of[state]]);
    state = from;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct StateAccumulator {
  double occupancy = 0;
  double self = 0;
  double advance = 0;
  std::vector<double> comp_occ;
  std::vector<double> sum;    // comp * dim
  std::vector<double> sumsq;  // comp * dim
};

}  // namespace

BaumWelchResult baum_welch(ModelSet& models, std::span<const TrainingExample> corpus,
                           int iterations) {
  if (iterations < 1) throw ModelError("baum_welch needs at least one iteration");
  for (const auto& ex : corpus) {
    for (const auto& label : ex.transcription) models.index_of(label);
  }
  const std::size_t dim = models.dimension();
  BaumWelchResult result;
  std::vector<double> alpha, beta, comp_ll;

  for (int it = 0; it < iterations; ++it) {
    std::vector<std::vector<StateAccumulator>> acc(models.models().size());
    for (std::size_t k = 0; k < acc.size(); ++k) {
      const auto& m = models.models()[k];
      acc[k].resize(m.states.size());
      for (std::size_t s = 0; s < m.states.size(); ++s) {
        const std::size_t nc = m.states[s].mixture.size();
        acc[k][s].comp_occ.assign(nc, 0.0);
        acc[k][s].sum.assign(nc * dim, 0.0);
        acc[k][s].sumsq.assign(nc * dim, 0.0);
      }
    }

    double total = 0;
    for (std::size_t u = 0; u < corpus.size(); ++u) {
      const auto& ex = corpus[u];
      const auto& seq = *ex.features;
      EmissionCache cache(models, seq, ex.transcription);
      const auto chain = make_chain(models, cache, ex.transcription);
      const std::size_t S = chain.size();
      const std::size_t T = seq.frames();
      const double log_p = forward_pass(chain, T, alpha);
      if (log_p == kLogZero) {
        if (it == 0) {
          result.flags.push_back("utterance " + std::to_string(u) +
                                 " too short for its transcription; skipped");
        }
        continue;
      }
      total += log_p;
      backward_pass(chain, T, beta);

      for (std::size_t s = 0; s < S; ++s) {
        auto& a = acc[chain.model[s]][chain.state[s]];
        const auto& mix = models.models()[chain.model[s]].states[chain.state[s]].mixture;
        const std::size_t nc = mix.size();
        comp_ll.resize(nc);
        for (std::size_t t = 0; t < T; ++t) {
          const double lg = alpha[t * S + s] + beta[t * S + s] - log_p;
          if (lg < -30) continue;
          const double g = std::exp(lg);
          a.occupancy += g;
          if (t + 1 < T) {
            a.self += std::exp(alpha[t * S + s] + chain.log_self[s] +
                               chain.emission[s][t + 1] + beta[(t + 1) * S + s] - log_p);
            if (s + 1 < S) {
              a.advance += std::exp(alpha[t * S + s] + chain.log_advance[s] +
                                    chain.emission[s + 1][t + 1] +
                                    beta[(t + 1) * S + s + 1] - log_p);
            }
          } else if (s + 1 == S) {
            a.advance += g;
          }
          const auto x = seq.frame(t);
          mix.component_log_likelihoods(x, comp_ll);
          const double norm = chain.emission[s][t];
          for (std::size_t m = 0; m < nc; ++m) {
            const double post = g * std::exp(comp_ll[m] - norm);
            if (post == 0) continue;
            a.comp_occ[m] += post;
            double* sum = a.sum.data() + m * dim;
            double* sq = a.sumsq.data() + m * dim;
            for (std::size_t d = 0; d < dim; ++d) {
              sum[d] += post * x[d];
              sq[d] += post * x[d] * x[d];
            }
          }
        }
      }
    }
    result.log_likelihood.push_back(total);

    const auto& floor = models.variance_floor();
    for (std::size_t k = 0; k < acc.size(); ++k) {
      auto& model = models.models()[k];
      for (std::size_t s = 0; s < model.states.size(); ++s) {
        const auto& a = acc[k][s];
        auto& state = model.states[s];
        if (a.occupancy < kMinOccupancy) {
          if (it == iterations - 1) {
            result.flags.push_back(model.label + " state " + std::to_string(s + 1) +
                                   " has no occupancy; parameters kept");
          }
          continue;
        }
        const double trans = a.self + a.advance;
        if (trans > 0) {
          state.self_loop = std::clamp(a.self / trans, kMinSelfLoop, 1.0 - kMinSelfLoop);
        }
        auto comps = state.mixture.components();
        double wsum = 0;
        for (std::size_t m = 0; m < comps.size(); ++m) {
          auto& c = comps[m];
          const double occ = a.comp_occ[m];
          c.weight = std::max(occ / a.occupancy, kMinWeight);
          wsum += c.weight;
          if (occ < kMinOccupancy) continue;
          for (std::size_t d = 0; d < dim; ++d) {
            const double mean = a.sum[m * dim + d] / occ;
            const double var = a.sumsq[m * dim + d] / occ - mean * mean;
            c.mean[d] = mean;
            c.variance[d] = std::max(var, floor[d]);
          }
        }
        for (auto& c : comps) c.weight /= wsum;
        state.mixture.set_components(std::move(comps));
      }
    }
  }
  return result;
}

void split_mixtures(ModelSet& models, std::size_t target) {
  for (auto& model : models.models()) {
    for (auto& state : model.states) {
      auto comps = state.mixture.components();
      if (target < comps.size()) {
        throw ModelError("cannot shrink " + model.label + " from " +
                         std::to_string(comps.size()) + " to " +
                         std::to_string(target) + " components");
      }
      while (comps.size() < target) {
        std::size_t heaviest = 0;
        for (std::size_t m = 1; m < comps.size(); ++m) {
          if (comps[m].weight > comps[heaviest].weight) heaviest = m;
        }
        GaussianComponent copy = comps[heaviest];
        comps[heaviest].weight *= 0.5;
        copy.weight = comps[heaviest].weight;
        for (std::size_t d = 0; d < copy.mean.size(); ++d) {
          const double shift = 0.2 * std::sqrt(copy.variance[d]);
          comps[heaviest].mean[d] += shift;
          copy.mean[d] -= shift;
        }
        comps.push_back(std::move(copy));
      }
      state.mixture.set_components(std::move(comps));
    }
  }
}

}  // namespace visemelab
