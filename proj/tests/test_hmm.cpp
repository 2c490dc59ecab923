#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "oracles.hpp"
#include "visemelab/error.hpp"
#include "visemelab/hmm.hpp"

using namespace visemelab;

namespace {

bool close(double a, double b, double rel = 1e-9) {
  if (a == kLogZero || b == kLogZero) return a == b;
  return std::abs(a - b) <= rel * std::max(1.0, std::abs(b));
}

GaussianMixture single(std::vector<double> mean, std::vector<double> var) {
  return GaussianMixture({{1.0, std::move(mean), std::move(var)}});
}

// Models whose states emit well separated 1-d means.
ModelSet separated(const std::vector<std::pair<std::string, std::vector<double>>>& spec) {
  ModelSet models(1, {1e-3});
  for (const auto& [label, means] : spec) {
    HmmModel m{label, {}};
    for (double mu : means) m.states.push_back({single({mu}, {0.05}), 0.5});
    models.add(m);
  }
  return models;
}

}  // namespace

TEST_CASE("gaussian log-likelihood against the closed form") {
  const auto g = single({1.0, -2.0}, {0.5, 2.0});
  const std::vector<double> x{0.0, 0.0};
  const double expect = -0.5 * (std::log(2 * M_PI * 0.5) + 1.0 / 0.5) -
                        0.5 * (std::log(2 * M_PI * 2.0) + 4.0 / 2.0);
  CHECK(close(g.log_likelihood(x), expect, 1e-12));

  GaussianMixture mix({{0.25, {0.0}, {1.0}}, {0.75, {3.0}, {1.0}}});
  const std::vector<double> y{1.0};
  const double p = 0.25 * std::exp(-0.5) / std::sqrt(2 * M_PI) +
                   0.75 * std::exp(-2.0) / std::sqrt(2 * M_PI);
  CHECK(close(mix.log_likelihood(y), std::log(p), 1e-12));
}

TEST_CASE("viterbi and forward equal exhaustive path enumeration") {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto models = oracle::random_models(rng, {"a", "b"}, 2, 4, 1 + trial % 2);
    // Single models and pairs, as long as the chain has at most 4 states.
    for (const std::vector<std::string>& tr :
         {std::vector<std::string>{"a"}, {"b"}, {"a", "b"}, {"b", "a"}, {"a", "a"}}) {
      std::size_t states = 0;
      for (const auto& l : tr) states += models.at(l).states.size();
      if (states > 4) continue;
      for (std::size_t frames = 1; frames <= 6; ++frames) {
        const auto seq = oracle::random_sequence(rng, 2, frames);
        EmissionCache cache(models, seq, tr);
        const auto chain = make_chain(models, cache, tr);
        const auto ex = oracle::exhaustive(chain, frames);
        const double v = viterbi_log_likelihood(chain, frames);
        const double f = forward_log_likelihood(chain, frames);
        CHECK(close(v, ex.best));
        CHECK(close(f, ex.total));
        if (ex.paths > 0) CHECK(f >= v);
        ++checked;
      }
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("forced alignment boundaries match the best enumerated path") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 80; ++trial) {
    const auto models = oracle::random_models(rng, {"a", "b", "c"}, 2, 2);
    const std::vector<std::string> tr{"a", "b", "c"};
    std::size_t states = 0;
    for (const auto& l : tr) states += models.at(l).states.size();
    const std::size_t frames = states + trial % 3;
    const auto seq = oracle::random_sequence(rng, 2, frames);
    EmissionCache cache(models, seq, tr);
    const auto chain = make_chain(models, cache, tr);

    std::vector<std::size_t> best_path;
    double best = kLogZero;
    oracle::for_each_path(chain.size(), frames, [&](const std::vector<std::size_t>& p) {
      const double s = oracle::path_score(chain, p);
      if (s > best) {
        best = s;
        best_path = p;
      }
    });
    const auto fa = force_align(models, seq, tr);
    CHECK(close(fa.log_likelihood, best));
    CHECK(fa.state_path == best_path);
    // Segment boundaries read off the enumerated path.
    std::vector<Segment> expect;
    for (std::size_t t = 0; t < frames; ++t) {
      std::size_t unit = 0;
      for (std::size_t s = 1; s <= best_path[t]; ++s) unit += chain.state[s] == 0;
      if (expect.size() == unit) {
        expect.push_back({tr[unit], t, t + 1});
      } else {
        expect.back().end = t + 1;
      }
    }
    CHECK(fa.segments == expect);
  }
}

TEST_CASE("forced alignment needs a frame per state") {
  const auto models = separated({{"a", {0, 1, 2}}});
  FeatureSequence seq(1, {0.0, 1.0});
  CHECK_THROWS_AS(force_align(models, seq, std::vector<std::string>{"a"}), ModelError);
}

TEST_CASE("viterbi_decode picks the right word; ties go to the smaller word") {
  const auto models = separated({{"lo", {0.0}}, {"hi", {5.0}}});
  WordNetwork net{{{"UP", {{"lo", "hi"}}}, {"DOWN", {{"hi", "lo"}}}, {"SAME", {{"lo", "hi"}}}}};
  FeatureSequence seq(1, {0.0, 0.1, 5.0, 4.9});
  const auto d = viterbi_decode(models, net, seq);
  CHECK(d.word == "SAME");  // identical to UP, alphabetically first
  FeatureSequence down(1, {5.0, 0.0, 0.1});
  CHECK(viterbi_decode(models, net, down).word == "DOWN");
}

TEST_CASE("label loop decoding matches enumeration over label sequences") {
  std::mt19937_64 rng(12);
  const std::vector<std::string> labels{"a", "b", "c"};
  for (int trial = 0; trial < 40; ++trial) {
    const auto models = oracle::random_models(rng, labels, 1, 2);
    const std::size_t frames = 3 + trial % 4;
    const auto seq = oracle::random_sequence(rng, 1, frames);
    const double entry = -std::log(3.0);

    std::vector<std::string> best_labels;
    double best = kLogZero;
    std::vector<std::string> cur;
    std::function<void(std::size_t)> grow = [&](std::size_t used) {
      if (!cur.empty()) {
        EmissionCache cache(models, seq, cur);
        const double v = viterbi_log_likelihood(make_chain(models, cache, cur), frames) +
                         entry * static_cast<double>(cur.size());
        if (v > best) {
          best = v;
          best_labels = cur;
        }
      }
      for (const auto& l : labels) {
        const std::size_t s = models.at(l).states.size();
        if (used + s > frames) continue;
        cur.push_back(l);
        grow(used + s);
        cur.pop_back();
      }
    };
    grow(0);
    CHECK(decode_label_loop(models, labels, seq) == best_labels);
  }
}

TEST_CASE("label loop separates a repeated single-state unit from a long one") {
  auto models = separated({{"a", {0.0}}, {"b", {9.0}}});
  models.at("a").states[0].self_loop = 0.999;  // cheap to stay
  FeatureSequence seq(1, {0.0, 0.0, 0.0, 9.0});
  CHECK(decode_label_loop(models, std::vector<std::string>{"a", "b"}, seq) ==
        std::vector<std::string>{"a", "b"});
  models.at("a").states[0].self_loop = 1e-3;  // every frame a fresh unit
  CHECK(decode_label_loop(models, std::vector<std::string>{"a", "b"}, seq) ==
        std::vector<std::string>{"a", "a", "a", "b"});
}

TEST_CASE("flat start uses global statistics") {
  std::vector<FeatureSequence> corpus{FeatureSequence(2, {0, 0, 2, 2})};
  const auto models = flat_start(corpus, std::vector<std::string>{"x", "y"}, 3);
  REQUIRE(models.models().size() == 2);
  for (const auto& m : models.models()) {
    REQUIRE(m.states.size() == 3);
    for (const auto& s : m.states) {
      const auto& c = s.mixture.components().at(0);
      CHECK(c.mean == std::vector<double>{1, 1});
      CHECK(c.variance == std::vector<double>{1, 1});
    }
  }
  CHECK(models.variance_floor() == std::vector<double>{1e-4, 1e-4});

  std::vector<FeatureSequence> flat{FeatureSequence(1, {3, 3, 3})};
  CHECK_THROWS_AS(flat_start(flat, std::vector<std::string>{"x"}), ModelError);
}

TEST_CASE("single-state re-estimation equals the closed form") {
  std::mt19937_64 rng(8);
  std::vector<FeatureSequence> data;
  for (std::size_t len : {4u, 7u, 5u}) data.push_back(oracle::random_sequence(rng, 2, len));
  ModelSet models(2, {1e-6, 1e-6});
  models.add({"a", {{single({5.0, -5.0}, {3.0, 3.0}), 0.5}}});
  std::vector<TrainingExample> corpus;
  for (const auto& d : data) corpus.push_back({&d, {"a"}});
  baum_welch(models, corpus, 1);

  double n = 0, utts = 0;
  std::vector<double> sum(2, 0), sq(2, 0);
  for (const auto& d : data) {
    utts += 1;
    for (std::size_t t = 0; t < d.frames(); ++t) {
      n += 1;
      for (std::size_t k = 0; k < 2; ++k) {
        sum[k] += d.frame(t)[k];
        sq[k] += d.frame(t)[k] * d.frame(t)[k];
      }
    }
  }
  const auto& st = models.at("a").states[0];
  const auto& c = st.mixture.components()[0];
  for (std::size_t k = 0; k < 2; ++k) {
    const double mean = sum[k] / n;
    CHECK(close(c.mean[k], mean, 1e-12));
    CHECK(close(c.variance[k], sq[k] / n - mean * mean, 1e-9));
  }
  CHECK(close(st.self_loop, (n - utts) / n, 1e-12));
}

TEST_CASE("baum-welch never lowers the likelihood and keeps models stochastic") {
  std::mt19937_64 rng(31);
  const auto truth = oracle::random_models(rng, {"a", "b"}, 3, 3, 2);
  std::vector<FeatureSequence> data;
  std::vector<std::vector<std::string>> labels;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int u = 0; u < 20; ++u) {
    // Sample from the generating models' first component means.
    std::vector<std::string> tr = u % 2 ? std::vector<std::string>{"a", "b"}
                                        : std::vector<std::string>{"b", "a", "b"};
    FeatureSequence seq;
    for (const auto& l : tr) {
      for (const auto& s : truth.at(l).states) {
        for (int rep = 0; rep < 3; ++rep) {
          std::vector<double> f = s.mixture.components()[0].mean;
          for (auto& v : f) v += 0.5 * noise(rng);
          seq.push_frame(f);
        }
      }
    }
    data.push_back(std::move(seq));
    labels.push_back(tr);
  }
  auto models = flat_start(data, std::vector<std::string>{"a", "b"}, 3);
  std::vector<TrainingExample> corpus;
  for (std::size_t u = 0; u < data.size(); ++u) corpus.push_back({&data[u], labels[u]});
  auto bw = baum_welch(models, corpus, 12);
  for (std::size_t i = 1; i < bw.log_likelihood.size(); ++i) {
    CHECK(bw.log_likelihood[i] >= bw.log_likelihood[i - 1] - 1e-6 * std::abs(bw.log_likelihood[i - 1]));
  }
  CHECK(check_model_set(models).empty());

  // Splitting then re-estimating does not fall below the pre-split value.
  const double before = baum_welch(models, corpus, 1).log_likelihood[0];
  split_mixtures(models, 2);
  CHECK(check_model_set(models).empty());
  const auto after = baum_welch(models, corpus, 2);
  CHECK(after.log_likelihood[1] >= before - 1e-6 * std::abs(before));
  CHECK(check_model_set(models).empty());
}

TEST_CASE("split moves the heaviest component by 0.2 standard deviations") {
  ModelSet models(1, {1e-4});
  models.add({"a", {{GaussianMixture({{0.7, {1.0}, {4.0}}, {0.3, {-3.0}, {1.0}}}), 0.5}}});
  split_mixtures(models, 3);
  const auto& comps = models.at("a").states[0].mixture.components();
  REQUIRE(comps.size() == 3);
  double total = 0;
  for (const auto& c : comps) total += c.weight;
  CHECK(close(total, 1.0, 1e-12));
  std::vector<double> means;
  for (const auto& c : comps) means.push_back(c.mean[0]);
  std::sort(means.begin(), means.end());
  CHECK(close(means[0], -3.0));
  CHECK(close(means[1], 1.0 - 0.4));
  CHECK(close(means[2], 1.0 + 0.4));
  CHECK_THROWS_AS(split_mixtures(models, 2), ModelError);
}

TEST_CASE("transition matrices are row-stochastic left-to-right") {
  std::mt19937_64 rng(3);
  const auto models = oracle::random_models(rng, {"a"}, 1, 4);
  const auto tm = models.at("a").transition_matrix();
  const std::size_t n = tm.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    CHECK(close(std::accumulate(tm[i].begin(), tm[i].end(), 0.0), 1.0, 1e-12));
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i + 1 && !(j == i && i > 0)) CHECK(tm[i][j] == 0.0);
    }
  }
  CHECK(std::accumulate(tm[n - 1].begin(), tm[n - 1].end(), 0.0) == 0.0);
}

TEST_CASE("model set JSON round-trip") {
  std::mt19937_64 rng(6);
  const auto models = oracle::random_models(rng, {"a", "b"}, 3, 3, 2);
  const auto back = model_set_from_json(nlohmann::json::parse(model_set_to_json(models).dump()));
  REQUIRE(back.labels() == models.labels());
  const auto seq = oracle::random_sequence(rng, 3, 8);
  const std::vector<std::string> tr{"a", "b"};
  CHECK(forward_log_likelihood(back, seq, tr) == forward_log_likelihood(models, seq, tr));
  CHECK(check_model_set(back).empty());
}

TEST_CASE("check_model_set reports broken weights and variances") {
  ModelSet models(1, {0.5});
  models.add({"a", {{GaussianMixture({{0.6, {0.0}, {0.1}}, {0.6, {1.0}, {1.0}}}), 0.5}}});
  CHECK(check_model_set(models).size() >= 2);
}
