#include "visemelab/clustering.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "visemelab/error.hpp"

namespace visemelab {

using ordered_json = nlohmann::ordered_json;

std::string P2VMap::label_of(std::string_view phoneme) const {
  for (const auto& v : visemes) {
    if (v.phonemes.count(std::string(phoneme))) return v.label;
  }
  if (garb.count(std::string(phoneme))) return std::string(kGarbLabel);
  if (sil.count(std::string(phoneme))) return std::string(kSilLabel);
  throw Error("phoneme '" + std::string(phoneme) + "' is not covered by map " +
              designation);
}

std::vector<std::string> P2VMap::model_labels() const {
  std::vector<std::string> labels;
  for (const auto& v : visemes) labels.push_back(v.label);
  if (!garb.empty()) labels.emplace_back(kGarbLabel);
  labels.emplace_back(kSilLabel);
  return labels;
}

bool ConfusionGraph::has_edge(std::string_view a, std::string_view b) const {
  auto ia = std::find(vertices.begin(), vertices.end(), a);
  auto ib = std::find(vertices.begin(), vertices.end(), b);
  if (ia == vertices.end() || ib == vertices.end()) return false;
  return adjacent[ia - vertices.begin()][ib - vertices.begin()];
}

std::size_t ConfusionGraph::edge_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) n += adjacent[i][j];
  }
  return n;
}

ConfusionGraph mutual_confusion_graph(const ConfusionMatrix& cm) {
  const auto& inv = cm.inventory();
  ConfusionGraph g;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < inv.size(); ++i) {
    if (inv.phonemes()[i].category() == PhonemeCategory::kSilence) continue;
    g.vertices.push_back(inv.phonemes()[i].symbol());
    idx.push_back(i);
  }
  const std::size_t n = idx.size();
  g.adjacent.assign(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto& pa = inv.phonemes()[idx[a]];
      const auto& pb = inv.phonemes()[idx[b]];
      if (pa.category() != pb.category()) continue;
      if (cm.count(idx[a], idx[b]) > 0 && cm.count(idx[b], idx[a]) > 0) {
        g.adjacent[a][b] = g.adjacent[b][a] = true;
      }
    }
  }
  return g;
}

PhonemeSet garb_class(const ConfusionMatrix& cm) {
  PhonemeSet garb;
  for (const auto& p : cm.inventory().phonemes()) {
    if (p.category() == PhonemeCategory::kSilence) continue;
    if (!cm.emitted().count(p.symbol())) garb.insert(p.symbol());
  }
  return garb;
}

std::int64_t confusion_mass(const ConfusionMatrix& cm, const PhonemeSet& set) {
  std::int64_t mass = 0;
  for (const auto& a : set) {
    for (const auto& b : set) mass += cm.count(a, b);
  }
  return mass;
}

namespace {

// Bron-Kerbosch with pivoting over index bitsets (graphs here are tiny).
void maximal_cliques(const std::vector<std::vector<bool>>& adj,
                     std::vector<int> r, std::vector<int> p, std::vector<int> x,
                     std::vector<std::vector<int>>& out) {
  if (p.empty() && x.empty()) {
    out.push_back(r);
    return;
  }
  int pivot = p.empty() ? x.front() : p.front();
  std::size_t best = 0;
  for (const auto& cand : {p, x}) {
    for (int u : cand) {
      std::size_t deg = 0;
      for (int v : p) deg += adj[u][v];
      if (deg >= best) {
        best = deg;
        pivot = u;
      }
    }
  }
  const std::vector<int> candidates = p;
  for (int v : candidates) {
    if (adj[pivot][v]) continue;
    std::vector<int> np, nx;
    for (int u : p) {
      if (adj[v][u]) np.push_back(u);
    }
    for (int u : x) {
      if (adj[v][u]) nx.push_back(u);
    }
    auto nr = r;
    nr.push_back(v);
    maximal_cliques(adj, std::move(nr), std::move(np), std::move(nx), out);
    p.erase(std::find(p.begin(), p.end(), v));
    x.push_back(v);
  }
}

std::vector<std::string> sorted_symbols(const PhonemeSet& s) {
  return {s.begin(), s.end()};
}

}  // namespace

std::vector<PhonemeSet> extract_cliques(const ConfusionMatrix& cm,
                                        const ConfusionGraph& graph,
                                        const PhonemeSet& vertices) {
  std::vector<int> remaining;
  for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
    if (vertices.count(graph.vertices[i])) remaining.push_back(static_cast<int>(i));
  }
  std::vector<PhonemeSet> result;
  while (!remaining.empty()) {
    std::vector<std::vector<int>> cliques;
    maximal_cliques(graph.adjacent, {}, remaining, {}, cliques);
    PhonemeSet best;
    std::int64_t best_mass = -1;
    for (const auto& c : cliques) {
      PhonemeSet set;
      for (int i : c) set.insert(graph.vertices[i]);
      const std::int64_t mass = confusion_mass(cm, set);
      const bool better =
          best.empty() || set.size() > best.size() ||
          (set.size() == best.size() &&
           (mass > best_mass ||
            (mass == best_mass && sorted_symbols(set) < sorted_symbols(best))));
      if (better) {
        best = std::move(set);
        best_mass = mass;
      }
    }
    std::erase_if(remaining, [&](int i) {
      return best.count(graph.vertices[i]) != 0;
    });
    result.push_back(std::move(best));
  }
  return result;
}

P2VMap cluster(const ConfusionMatrix& cm, std::string designation) {
  const auto graph = mutual_confusion_graph(cm);
  P2VMap map;
  map.designation = std::move(designation);
  map.garb = garb_class(cm);

  for (auto category : {PhonemeCategory::kVowel, PhonemeCategory::kConsonant}) {
    PhonemeSet members;
    for (const auto& p : cm.inventory().phonemes()) {
      if (p.category() == category && !map.garb.count(p.symbol())) {
        members.insert(p.symbol());
      }
    }
    auto cliques = extract_cliques(cm, graph, members);
    std::vector<std::pair<std::int64_t, std::size_t>> order;
    for (std::size_t k = 0; k < cliques.size(); ++k) {
      order.emplace_back(-confusion_mass(cm, cliques[k]), k);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [neg_mass, k] : order) {
      char label[8];
      std::snprintf(label, sizeof label, "v%02zu", map.visemes.size() + 1);
      map.visemes.push_back({label, std::move(cliques[k])});
    }
  }
  return map;
}

std::vector<MapViolation> validate_map(const P2VMap& map,
                                       const Inventory& inventory) {
  using Kind = MapViolation::Kind;
  std::vector<MapViolation> out;
  std::map<std::string, int> seen;
  auto visit = [&](const PhonemeSet& set) {
    for (const auto& p : set) {
      if (!inventory.contains(p)) {
        out.push_back({Kind::kUnknown, "unknown phoneme /" + p + "/"});
        continue;
      }
      if (++seen[p] == 2) {
        out.push_back({Kind::kOverlap, "/" + p + "/ appears in more than one class"});
      }
    }
  };
  for (std::size_t k = 0; k < map.visemes.size(); ++k) {
    const auto& v = map.visemes[k];
    char expected[8];
    std::snprintf(expected, sizeof expected, "v%02zu", k + 1);
    if (v.label != expected) {
      out.push_back({Kind::kBadLabel, "viseme " + v.label + " should be " + expected});
    }
    visit(v.phonemes);
    bool vowel = false, consonant = false, silence = false;
    for (const auto& p : v.phonemes) {
      if (!inventory.contains(p)) continue;
      switch (inventory.category(p)) {
        case PhonemeCategory::kVowel: vowel = true; break;
        case PhonemeCategory::kConsonant: consonant = true; break;
        case PhonemeCategory::kSilence: silence = true; break;
      }
    }
    if (vowel + consonant + silence > 1) {
      out.push_back({Kind::kCategoryMix, "viseme " + v.label + " mixes categories"});
    }
  }
  visit(map.garb);
  visit(map.sil);
  for (const auto& p : inventory.phonemes()) {
    if (!seen.count(p.symbol())) {
      out.push_back({Kind::kMissing, "/" + p.symbol() + "/ is not mapped"});
    }
  }
  return out;
}

std::string serialize_map(const P2VMap& map) {
  ordered_json doc;
  doc["designation"] = map.designation;
  doc["visemes"] = ordered_json::array();
  for (const auto& v : map.visemes) {
    ordered_json entry;
    entry["label"] = v.label;
    entry["phonemes"] = std::vector<std::string>(v.phonemes.begin(), v.phonemes.end());
    doc["visemes"].push_back(std::move(entry));
  }
  doc["sil"] = std::vector<std::string>(map.sil.begin(), map.sil.end());
  doc["garb"] = std::vector<std::string>(map.garb.begin(), map.garb.end());
  return doc.dump(2) + "\n";
}

P2VMap parse_map(std::string_view json_text) {
  try {
    const auto doc = nlohmann::json::parse(json_text);
    P2VMap map;
    map.designation = doc.at("designation").get<std::string>();
    for (const auto& v : doc.at("visemes")) {
      auto phonemes = v.at("phonemes").get<std::vector<std::string>>();
      map.visemes.push_back({v.at("label").get<std::string>(),
                             PhonemeSet(phonemes.begin(), phonemes.end())});
    }
    auto sil = doc.at("sil").get<std::vector<std::string>>();
    auto garb = doc.at("garb").get<std::vector<std::string>>();
    map.sil = PhonemeSet(sil.begin(), sil.end());
    map.garb = PhonemeSet(garb.begin(), garb.end());
    return map;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad map document: ") + e.what());
  }
}

P2VMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open map '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str());
}

P2VMap identity_map(const Inventory& inventory, std::string designation) {
  P2VMap map;
  map.designation = std::move(designation);
  for (auto category : {PhonemeCategory::kVowel, PhonemeCategory::kConsonant}) {
    for (const auto& p : inventory.phonemes()) {
      if (p.category() != category) continue;
      char label[8];
      std::snprintf(label, sizeof label, "v%02zu", map.visemes.size() + 1);
      map.visemes.push_back({label, {p.symbol()}});
    }
  }
  return map;
}

}  // namespace visemelab
