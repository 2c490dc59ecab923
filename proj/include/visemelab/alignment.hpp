#ifndef VISEMELAB_ALIGNMENT_HPP_
#define VISEMELAB_ALIGNMENT_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "visemelab/lexicon.hpp"

namespace visemelab {

enum class StepKind { kMatch, kSubstitution, kInsertion, kDeletion };

struct AlignmentStep {
  StepKind kind;
  std::optional<std::string> reference;
  std::optional<std::string> hypothesis;

  friend bool operator==(const AlignmentStep&, const AlignmentStep&) = default;
};

// Unit-cost edit cost of an alignment (matches are free).
int alignment_cost(std::span<const AlignmentStep> steps);

// Minimal-cost global alignment with unit costs. Among optimal paths the
// trace prefers substitution/match, then deletion, then insertion.
std::vector<AlignmentStep> align(std::span<const std::string> reference,
                                 std::span<const std::string> hypothesis);

// counts(r, h): how often reference r was recognised as h.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(Inventory inventory);

  const Inventory& inventory() const { return inventory_; }
  std::size_t size() const { return inventory_.size(); }

  std::int64_t count(std::size_t ref, std::size_t hyp) const {
    return counts_[ref * size() + hyp];
  }
  std::int64_t count(std::string_view ref, std::string_view hyp) const;
  void add(std::size_t ref, std::size_t hyp, std::int64_t n = 1);

  const std::set<std::string>& emitted() const { return emitted_; }
  void mark_emitted(const std::string& symbol);

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;

 private:
  Inventory inventory_;
  std::vector<std::int64_t> counts_;
  std::set<std::string> emitted_;
};

using SequencePair = std::pair<PhonemeSeq, PhonemeSeq>;

// Matches and substitutions add to counts; insertions and deletions only
// mark hypothesis symbols as emitted.
ConfusionMatrix accumulate_confusions(std::span<const SequencePair> pairs,
                                      const Inventory& inventory);

// Elementwise sum; throws Error when inventories differ.
ConfusionMatrix merge_confusions(std::span<const ConfusionMatrix> matrices);

// CSV: header row `ref/hyp,<symbols>`, one row per reference phoneme, a
// trailing `# emitted: ...` comment. Other `#` lines are ignored on read.
std::string serialize_confusions_csv(const ConfusionMatrix& cm);
ConfusionMatrix parse_confusions_csv(std::string_view text,
                                     const Inventory& inventory =
                                         Inventory::standard());
ConfusionMatrix load_confusions_csv(const std::string& path);

}  // namespace visemelab

#endif  // VISEMELAB_ALIGNMENT_HPP_
