#include "visemelab/report.hpp"

#include <cstdio>
#include <tuple>

#include "visemelab/error.hpp"
#include "visemelab/translation.hpp"

namespace visemelab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fmt(const char* pattern, double a, double b = 0) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

ordered_json correctness_json(const Correctness& c, int folds) {
  return {{"mean", c.mean}, {"se", c.standard_error}, {"folds", folds}};
}

}  // namespace

const FamilySummary* Report::family(Family f) const {
  for (const auto& fs : families) {
    if (fs.family == f) return &fs;
  }
  return nullptr;
}

Report build_report(const StudyResult& result) {
  Report report;
  using Key = std::tuple<Family, int, SpeakerSet, int>;
  std::map<Key, std::vector<double>> per_spec;
  std::map<Family, std::vector<double>> per_family;
  for (const auto& r : result.folds) {
    const auto c = r.result.correctness();
    per_spec[{r.spec.family, r.spec.test_speaker, r.spec.map_source, r.spec.train_speaker}]
        .push_back(c);
    per_family[r.spec.family].push_back(c);
  }
  for (const auto& [family, values] : per_family) {
    FamilySummary fs;
    fs.family = family;
    fs.correctness = summarize(values);
    fs.folds = static_cast<int>(values.size());
    for (const auto& [key, v] : per_spec) {
      const auto& [f, q, n, p] = key;
      if (f != family) continue;
      fs.specs.push_back({{n, p, q, f}, summarize(v), static_cast<int>(v.size())});
    }
    report.families.push_back(std::move(fs));
  }

  for (const auto& [seed, maps] : result.maps) {
    for (const auto& [designation, map] : maps) {
      const auto h = homophone_analysis(bundled_lexicon(), map);
      report.homophones.push_back({seed, designation, h.unique_words, h.collisions()});
    }
  }

  const auto* ssd = report.family(Family::kSSD);
  const auto* dsd = report.family(Family::kDSD);
  if (ssd && dsd) {
    std::map<int, Correctness> baseline;
    for (const auto& s : ssd->specs) baseline[s.spec.test_speaker] = s.correctness;
    std::map<std::pair<int, int>, double> others;
    for (const auto& s : dsd->specs) {
      others[{*s.spec.map_source.begin(), s.spec.test_speaker}] = s.correctness.mean;
    }
    report.scores = weighted_scores(others, baseline);
  }
  return report;
}

std::string render_report(const Report& report) {
  if (report.empty()) return "no results\n";
  std::string out;
  for (const auto& fs : report.families) {
    out += "Family " + to_string(fs.family) + ": correctness " +
           fmt("%.3f +- %.3f", fs.correctness.mean, fs.correctness.standard_error) + " (" +
           std::to_string(fs.folds) + " folds)\n";
    for (const auto& s : fs.specs) {
      out += "  " + pad(s.spec.name(), 14) +
             fmt("%.3f +- %.3f", s.correctness.mean, s.correctness.standard_error) + "\n";
    }
    out += "\n";
  }

  if (!report.homophones.empty()) {
    out += "Homophones (T = distinct words after translation)\n";
    out += "  " + pad("seed", 12) + pad("map", 9) + "T\n";
    for (const auto& h : report.homophones) {
      out += "  " + pad(std::to_string(h.seed), 12) + pad(h.designation, 9) +
             std::to_string(h.unique_words) + "\n";
    }
    out += "\n";
  }

  if (report.scores) {
    const auto& m = *report.scores;
    out += "Weighted scores (rows: speaker, columns: map)\n  " + pad("", 8);
    for (int n : m.maps) out += pad_left("M_" + std::to_string(n), 6);
    out += "\n";
    for (std::size_t r = 0; r < m.speakers.size(); ++r) {
      out += "  " + pad("Sp" + std::to_string(m.speakers[r]), 8);
      for (int v : m.scores[r]) out += pad_left(std::to_string(v), 6);
      out += "\n";
    }
    out += "  " + pad("total", 8);
    for (int v : m.totals) out += pad_left(std::to_string(v), 6);
    out += "\n  ranking:";
    const auto rank = m.ranking();
    for (std::size_t i = 0; i < rank.size(); ++i) {
      out += (i ? " > M_" : " M_") + std::to_string(rank[i]);
    }
    out += "\n\n";
  }

  out += "Reference SSD correctness on the original video:";
  for (const auto& [key, value] : report.reference) {
    out += " " + key + " " + fmt("%.1f%%", 100 * value);
  }
  out += "\n";
  return out;
}

ordered_json report_to_json(const Report& report) {
  ordered_json doc;
  doc["families"] = ordered_json::array();
  for (const auto& fs : report.families) {
    ordered_json jf = {{"family", to_string(fs.family)}};
    jf["correctness"] = correctness_json(fs.correctness, fs.folds);
    jf["specs"] = ordered_json::array();
    for (const auto& s : fs.specs) {
      jf["specs"].push_back(
          {{"spec", s.spec.name()},
           {"map_source", std::vector<int>(s.spec.map_source.begin(), s.spec.map_source.end())},
           {"train_speaker", s.spec.train_speaker},
           {"test_speaker", s.spec.test_speaker},
           {"correctness", correctness_json(s.correctness, s.folds)}});
    }
    doc["families"].push_back(std::move(jf));
  }
  doc["homophones"] = ordered_json::array();
  for (const auto& h : report.homophones) {
    doc["homophones"].push_back({{"seed", h.seed},
                                 {"map", h.designation},
                                 {"T", h.unique_words},
                                 {"collisions", h.collisions}});
  }
  if (report.scores) {
    const auto& m = *report.scores;
    doc["scores"] = {{"speakers", m.speakers},
                     {"maps", m.maps},
                     {"matrix", m.scores},
                     {"totals", m.totals},
                     {"ranking", m.ranking()}};
  }
  doc["reference"] = report.reference;
  return doc;
}

Report report_from_json(const json& doc) {
  try {
    Report report;
    auto read_correctness = [](const json& j, Correctness& c, int& folds) {
      c.mean = j.at("mean").get<double>();
      c.standard_error = j.at("se").get<double>();
      folds = j.at("folds").get<int>();
    };
    for (const auto& jf : doc.at("families")) {
      FamilySummary fs;
      fs.family = parse_family(jf.at("family").get<std::string>());
      read_correctness(jf.at("correctness"), fs.correctness, fs.folds);
      for (const auto& js : jf.at("specs")) {
        SpecSummary s;
        const auto n = js.at("map_source").get<std::vector<int>>();
        s.spec = {SpeakerSet(n.begin(), n.end()), js.at("train_speaker").get<int>(),
                  js.at("test_speaker").get<int>(), fs.family};
        read_correctness(js.at("correctness"), s.correctness, s.folds);
        fs.specs.push_back(std::move(s));
      }
      report.families.push_back(std::move(fs));
    }
    for (const auto& jh : doc.at("homophones")) {
      report.homophones.push_back(
          {jh.at("seed").get<std::uint64_t>(), jh.at("map").get<std::string>(),
           jh.at("T").get<std::size_t>(),
           jh.at("collisions").get<std::vector<std::vector<std::string>>>()});
    }
    if (doc.contains("scores")) {
      const auto& js = doc.at("scores");
      ScoreMatrix m;
      m.speakers = js.at("speakers").get<std::vector<int>>();
      m.maps = js.at("maps").get<std::vector<int>>();
      m.scores = js.at("matrix").get<std::vector<std::vector<int>>>();
      m.totals = js.at("totals").get<std::vector<int>>();
      report.scores = std::move(m);
    }
    report.reference = doc.at("reference").get<std::map<std::string, double>>();
    return report;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad report: ") + e.what());
  }
}

}  // namespace visemelab
