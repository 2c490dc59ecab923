#include "visemelab/translation.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace visemelab {

VisemeString apply_map(std::span<const std::string> pronunciation,
                       const P2VMap& map) {
  VisemeString out;
  out.reserve(pronunciation.size());
  for (const auto& ph : pronunciation) out.push_back(map.label_of(ph));
  return out;
}

std::string join(std::span<const std::string> tokens, std::string_view sep) {
  std::string out;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (k) out += sep;
    out += tokens[k];
  }
  return out;
}

std::vector<std::vector<std::string>> HomophoneResult::collisions() const {
  std::vector<std::vector<std::string>> out;
  for (const auto& g : groups) {
    if (g.size() > 1) out.push_back(g);
  }
  return out;
}

HomophoneResult homophone_analysis(const Lexicon& lexicon, const P2VMap& map) {
  const auto words = lexicon.words();
  std::vector<std::size_t> parent(words.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::map<VisemeString, std::size_t> owner;
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (const auto& pron : lexicon.pronunciations(words[w])) {
      auto [it, inserted] = owner.emplace(apply_map(pron, map), w);
      if (!inserted) {
        auto a = find(it->second), b = find(w);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  std::map<std::size_t, std::vector<std::string>> classes;
  for (std::size_t w = 0; w < words.size(); ++w) {
    classes[find(w)].push_back(words[w]);
  }
  HomophoneResult result;
  for (auto& [root, members] : classes) result.groups.push_back(std::move(members));
  result.unique_words = result.groups.size();
  return result;
}

}  // namespace visemelab
