#ifndef VISEMELAB_LEXICON_HPP_
#define VISEMELAB_LEXICON_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace visemelab {

enum class PhonemeCategory { kVowel, kConsonant, kSilence };

std::string_view to_string(PhonemeCategory category);

class Phoneme {
 public:
  Phoneme(std::string symbol, PhonemeCategory category);

  const std::string& symbol() const { return symbol_; }
  PhonemeCategory category() const { return category_; }

  friend bool operator==(const Phoneme&, const Phoneme&) = default;

 private:
  std::string symbol_;
  PhonemeCategory category_;
};

inline constexpr std::string_view kSilence = "sil";

using PhonemeSeq = std::vector<std::string>;

// Ordered set of phonemes with symbol lookup. Index order is the order of
// construction and is used for matrix layouts.
class Inventory {
 public:
  Inventory() = default;
  explicit Inventory(std::vector<Phoneme> phonemes);

  // The 29 British-English phonemes of the letter corpus plus /sil/.
  static const Inventory& standard();

  bool contains(std::string_view symbol) const;
  // Throws Error for unknown symbols.
  std::size_t index_of(std::string_view symbol) const;
  PhonemeCategory category(std::string_view symbol) const;

  const std::vector<Phoneme>& phonemes() const { return phonemes_; }
  std::size_t size() const { return phonemes_.size(); }
  std::vector<std::string> symbols() const;

  // Same inventory minus silence; the clustering domain.
  Inventory without_silence() const;

  friend bool operator==(const Inventory& a, const Inventory& b) {
    return a.phonemes_ == b.phonemes_;
  }

 private:
  std::vector<Phoneme> phonemes_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Word -> pronunciation variants. Variants keep their file order; words are
// kept sorted.
class Lexicon {
 public:
  explicit Lexicon(const Inventory& inventory = Inventory::standard());

  // Adds a variant. Unknown phonemes and empty pronunciations throw; an exact
  // duplicate of an existing variant is ignored.
  void add(const std::string& word, PhonemeSeq pronunciation);

  const std::vector<PhonemeSeq>& pronunciations(const std::string& word) const;
  bool contains(const std::string& word) const;
  std::vector<std::string> words() const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const std::map<std::string, std::vector<PhonemeSeq>>& entries() const {
    return entries_;
  }
  const Inventory& inventory() const { return inventory_; }

  friend bool operator==(const Lexicon& a, const Lexicon& b) {
    return a.entries_ == b.entries_;
  }

 private:
  Inventory inventory_;
  std::map<std::string, std::vector<PhonemeSeq>> entries_;
};

// Parses `WORD ph1 ph2 ...` lines; `#` starts a comment. Errors carry the
// 1-based line number.
Lexicon parse_lexicon(std::string_view text,
                      const Inventory& inventory = Inventory::standard());
Lexicon load_lexicon(const std::string& path,
                     const Inventory& inventory = Inventory::standard());
std::string serialize_lexicon(const Lexicon& lexicon);

// Bundled A-Z letter lexicon.
const Lexicon& bundled_lexicon();
std::string bundled_data_path(std::string_view relative);

// Phoneme counts over every pronunciation variant, silence omitted.
std::map<std::string, std::size_t> phoneme_histogram(const Lexicon& lexicon);

}  // namespace visemelab

#endif  // VISEMELAB_LEXICON_HPP_
