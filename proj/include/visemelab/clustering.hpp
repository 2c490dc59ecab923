#ifndef VISEMELAB_CLUSTERING_HPP_
#define VISEMELAB_CLUSTERING_HPP_

#include <set>
#include <string>
#include <vector>

#include "visemelab/alignment.hpp"
#include "visemelab/lexicon.hpp"

namespace visemelab {

inline constexpr std::string_view kGarbLabel = "garb";
inline constexpr std::string_view kSilLabel = "sil";

using PhonemeSet = std::set<std::string>;

struct Viseme {
  std::string label;
  PhonemeSet phonemes;
  friend bool operator==(const Viseme&, const Viseme&) = default;
};

struct P2VMap {
  std::string designation;
  std::vector<Viseme> visemes;
  PhonemeSet sil{std::string(kSilence)};
  PhonemeSet garb;

  // Class label of a phoneme: a viseme label, "garb" or "sil". Throws Error
  // when the map does not cover the phoneme.
  std::string label_of(std::string_view phoneme) const;
  // Model labels needed to recognise with this map.
  std::vector<std::string> model_labels() const;

  friend bool operator==(const P2VMap&, const P2VMap&) = default;
};

// Undirected graph over the non-silence phonemes of a matrix.
struct ConfusionGraph {
  std::vector<std::string> vertices;
  std::vector<std::vector<bool>> adjacent;

  bool has_edge(std::string_view a, std::string_view b) const;
  std::size_t edge_count() const;
};

// Edge {p,q} iff p and q were confused in both directions and share a
// category.
ConfusionGraph mutual_confusion_graph(const ConfusionMatrix& cm);

// Inventory phonemes (silence excluded) never seen in recogniser output.
PhonemeSet garb_class(const ConfusionMatrix& cm);

// Sum of counts(p, q) over all ordered pairs inside the set, diagonal
// included.
std::int64_t confusion_mass(const ConfusionMatrix& cm, const PhonemeSet& set);

// Greedy clique partition of one vertex subset: repeatedly take the largest
// clique, ties broken by larger confusion mass then lexicographically smaller
// sorted symbol list. Returned in extraction order.
std::vector<PhonemeSet> extract_cliques(const ConfusionMatrix& cm,
                                        const ConfusionGraph& graph,
                                        const PhonemeSet& vertices);

// Full map: vowels and consonants partitioned separately; garb phonemes are
// left out of both. Labels go to vowel visemes first, then consonant
// visemes, each by descending confusion mass (extraction order on ties).
P2VMap cluster(const ConfusionMatrix& cm, std::string designation = "M");

struct MapViolation {
  enum class Kind { kOverlap, kCategoryMix, kMissing, kUnknown, kBadLabel };
  Kind kind;
  std::string detail;
};

std::vector<MapViolation> validate_map(const P2VMap& map,
                                       const Inventory& inventory);

// Canonical JSON document (2-space indent, trailing newline).
std::string serialize_map(const P2VMap& map);
P2VMap parse_map(std::string_view json_text);
P2VMap load_map(const std::string& path);

// Each phoneme its own viseme; handy as a reference point.
P2VMap identity_map(const Inventory& inventory, std::string designation = "identity");

}  // namespace visemelab

#endif  // VISEMELAB_CLUSTERING_HPP_
