#include "visemelab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "visemelab/error.hpp"

namespace visemelab {

std::string to_string(Family family) {
  switch (family) {
    case Family::kSSD: return "SSD";
    case Family::kDSDD: return "DSD&D";
    case Family::kDSD: return "DSD";
    case Family::kMS: return "MS";
    case Family::kSI: return "SI";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "SSD") return Family::kSSD;
  if (name == "DSD&D" || name == "DSDD") return Family::kDSDD;
  if (name == "DSD") return Family::kDSD;
  if (name == "MS") return Family::kMS;
  if (name == "SI") return Family::kSI;
  throw ConfigError("unknown experiment family '" + std::string(name) + "'");
}

std::vector<Family> all_families() {
  return {Family::kSSD, Family::kDSDD, Family::kDSD, Family::kMS, Family::kSI};
}

std::string map_designation(const SpeakerSet& speakers) {
  std::string out = "M_";
  for (int s : speakers) out += std::to_string(s);
  return out;
}

std::string ExperimentSpec::name() const {
  return map_designation(map_source) + "(" + std::to_string(train_speaker) + "," +
         std::to_string(test_speaker) + ")";
}

std::optional<Family> classify(const SpeakerSet& n, int p, int q, int speaker_count) {
  SpeakerSet all;
  for (int s = 1; s <= speaker_count; ++s) all.insert(s);
  auto valid = [&](int s) { return s >= 1 && s <= speaker_count; };
  if (!valid(p) || !valid(q) || n.empty()) return std::nullopt;
  if (!std::includes(all.begin(), all.end(), n.begin(), n.end())) return std::nullopt;

  const bool single = n.size() == 1;
  if (single && *n.begin() == p && p == q) return Family::kSSD;
  if (single && *n.begin() == p && p != q) return Family::kDSDD;
  if (p != q) return std::nullopt;
  if (single) return Family::kDSD;  // n != {p} here
  if (n == all) return Family::kMS;
  SpeakerSet others = all;
  others.erase(q);
  if (n == others) return Family::kSI;
  return std::nullopt;
}

std::vector<ExperimentSpec> family_specs(Family family, int speaker_count) {
  std::vector<ExperimentSpec> specs;
  SpeakerSet all;
  for (int s = 1; s <= speaker_count; ++s) all.insert(s);
  for (int q = 1; q <= speaker_count; ++q) {
    switch (family) {
      case Family::kSSD:
        specs.push_back({{q}, q, q, family});
        break;
      case Family::kDSDD:
        for (int n = 1; n <= speaker_count; ++n) {
          if (n != q) specs.push_back({{n}, n, q, family});
        }
        break;
      case Family::kDSD:
        for (int n = 1; n <= speaker_count; ++n) {
          if (n != q) specs.push_back({{n}, q, q, family});
        }
        break;
      case Family::kMS:
        specs.push_back({all, q, q, family});
        break;
      case Family::kSI: {
        SpeakerSet others = all;
        others.erase(q);
        specs.push_back({others, q, q, family});
        break;
      }
    }
  }
  return specs;
}

std::vector<Fold> crossval_folds(const Corpus& corpus, int k) {
  std::set<int> recs;
  for (const auto& u : corpus.utterances) recs.insert(u.recitation);
  if (static_cast<int>(recs.size()) != k) {
    throw ConfigError("corpus has " + std::to_string(recs.size()) +
                      " recitations, cross-validation needs " + std::to_string(k));
  }
  std::vector<Fold> folds;
  for (int rec : recs) {
    Fold f;
    f.recitation = rec;
    for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
      (corpus.utterances[i].recitation == rec ? f.test : f.train).push_back(i);
    }
    folds.push_back(std::move(f));
  }
  return folds;
}

Correctness summarize(std::span<const double> values) {
  Correctness c;
  if (values.empty()) return c;
  const double n = static_cast<double>(values.size());
  c.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - c.mean) * (v - c.mean);
    c.standard_error = std::sqrt(ss / (n - 1)) / std::sqrt(n);
  }
  return c;
}

Correctness correctness(std::span<const FoldResult> folds) {
  if (folds.empty()) throw Error("correctness of an empty result set");
  std::vector<double> values;
  for (const auto& f : folds) values.push_back(f.correctness());
  return summarize(values);
}

int weighted_score(double dsd, const Correctness& baseline) {
  const double diff = dsd - baseline.mean;
  if (diff == 0) return 0;
  const int magnitude = std::abs(diff) > baseline.standard_error ? 2 : 1;
  return diff > 0 ? magnitude : -magnitude;
}

std::vector<int> ScoreMatrix::ranking() const {
  std::vector<std::size_t> idx(maps.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return totals[a] > totals[b]; });
  std::vector<int> out;
  for (auto i : idx) out.push_back(maps[i]);
  return out;
}

ScoreMatrix weighted_scores(const std::map<std::pair<int, int>, double>& dsd,
                            const std::map<int, Correctness>& ssd) {
  ScoreMatrix m;
  for (const auto& [speaker, _] : ssd) {
    m.speakers.push_back(speaker);
    m.maps.push_back(speaker);
  }
  m.totals.assign(m.maps.size(), 0);
  for (int p : m.speakers) {
    std::vector<int> row;
    for (std::size_t c = 0; c < m.maps.size(); ++c) {
      const int n = m.maps[c];
      int score = 0;
      if (n != p) {
        auto it = dsd.find({n, p});
        if (it == dsd.end()) {
          throw ConfigError("missing DSD result for M_" + std::to_string(n) + "(" +
                            std::to_string(p) + "," + std::to_string(p) + ")");
        }
        score = weighted_score(it->second, ssd.at(p));
      }
      row.push_back(score);
      m.totals[c] += score;
    }
    m.scores.push_back(std::move(row));
  }
  return m;
}

}  // namespace visemelab
