#ifndef VISEMELAB_TRANSLATION_HPP_
#define VISEMELAB_TRANSLATION_HPP_

#include <set>
#include <span>
#include <string>
#include <vector>

#include "visemelab/clustering.hpp"
#include "visemelab/lexicon.hpp"

namespace visemelab {

using VisemeString = std::vector<std::string>;

// Position-wise relabelling of a pronunciation through the map.
VisemeString apply_map(std::span<const std::string> pronunciation,
                       const P2VMap& map);

std::string join(std::span<const std::string> tokens, std::string_view sep = " ");

struct HomophoneResult {
  std::size_t unique_words = 0;  // T
  // Every equivalence class, singletons included, sorted by first word.
  std::vector<std::vector<std::string>> groups;

  std::vector<std::vector<std::string>> collisions() const;
};

// Two words are homophones when any of their translated variants coincide;
// classes are the transitive closure of that relation.
HomophoneResult homophone_analysis(const Lexicon& lexicon, const P2VMap& map);

}  // namespace visemelab

#endif  // VISEMELAB_TRANSLATION_HPP_
