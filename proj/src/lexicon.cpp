#include "visemelab/lexicon.hpp"

#include <fstream>
#include <sstream>

#include "visemelab/error.hpp"

namespace visemelab {

std::string_view to_string(PhonemeCategory category) {
  switch (category) {
    case PhonemeCategory::kVowel:
      return "vowel";
    case PhonemeCategory::kConsonant:
      return "consonant";
    case PhonemeCategory::kSilence:
      return "silence";
  }
  return "unknown";
}

Phoneme::Phoneme(std::string symbol, PhonemeCategory category)
    : symbol_(std::move(symbol)), category_(category) {
  if (symbol_.empty()) throw Error("phoneme symbol must be nonempty");
}

Inventory::Inventory(std::vector<Phoneme> phonemes)
    : phonemes_(std::move(phonemes)) {
  for (std::size_t i = 0; i < phonemes_.size(); ++i) {
    auto [it, inserted] = index_.emplace(phonemes_[i].symbol(), i);
    if (!inserted) {
      throw Error("duplicate phoneme symbol '" + phonemes_[i].symbol() + "'");
    }
  }
}

const Inventory& Inventory::standard() {
  static const Inventory inventory = [] {
    std::vector<Phoneme> ph;
    for (const char* v : {"aa", "ah", "ao", "ax", "ay", "ea", "eh", "ey", "iy",
                          "oh", "ow", "uw"}) {
      ph.emplace_back(v, PhonemeCategory::kVowel);
    }
    for (const char* c : {"b", "ch", "d", "f", "jh", "k", "l", "m", "n", "p",
                          "r", "s", "t", "v", "w", "y", "z"}) {
      ph.emplace_back(c, PhonemeCategory::kConsonant);
    }
    ph.emplace_back(std::string(kSilence), PhonemeCategory::kSilence);
    return Inventory(std::move(ph));
  }();
  return inventory;
}

bool Inventory::contains(std::string_view symbol) const {
  return index_.find(symbol) != index_.end();
}

std::size_t Inventory::index_of(std::string_view symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end()) {
    throw Error("unknown phoneme '" + std::string(symbol) + "'");
  }
  return it->second;
}

PhonemeCategory Inventory::category(std::string_view symbol) const {
  return phonemes_[index_of(symbol)].category();
}

std::vector<std::string> Inventory::symbols() const {
  std::vector<std::string> out;
  out.reserve(phonemes_.size());
  for (const auto& p : phonemes_) out.push_back(p.symbol());
  return out;
}

Inventory Inventory::without_silence() const {
  std::vector<Phoneme> kept;
  for (const auto& p : phonemes_) {
    if (p.category() != PhonemeCategory::kSilence) kept.push_back(p);
  }
  return Inventory(std::move(kept));
}

Lexicon::Lexicon(const Inventory& inventory) : inventory_(inventory) {}

void Lexicon::add(const std::string& word, PhonemeSeq pronunciation) {
  if (word.empty()) throw Error("empty word");
  if (pronunciation.empty()) {
    throw Error("empty pronunciation for word '" + word + "'");
  }
  for (const auto& ph : pronunciation) {
    if (!inventory_.contains(ph)) {
      throw Error("unknown phoneme '" + ph + "' in word '" + word + "'");
    }
  }
  auto& variants = entries_[word];
  for (const auto& v : variants) {
    if (v == pronunciation) return;
  }
  variants.push_back(std::move(pronunciation));
}

const std::vector<PhonemeSeq>& Lexicon::pronunciations(
    const std::string& word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) throw Error("word '" + word + "' not in lexicon");
  return it->second;
}

bool Lexicon::contains(const std::string& word) const {
  return entries_.count(word) != 0;
}

std::vector<std::string> Lexicon::words() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [w, _] : entries_) out.push_back(w);
  return out;
}

Lexicon parse_lexicon(std::string_view text, const Inventory& inventory) {
  Lexicon lexicon(inventory);
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    PhonemeSeq pron;
    for (std::string ph; fields >> ph;) {
      if (!inventory.contains(ph)) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": unknown phoneme '" + ph + "'");
      }
      pron.push_back(ph);
    }
    if (pron.empty()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": empty pronunciation for '" + word + "'");
    }
    lexicon.add(word, std::move(pron));
  }
  return lexicon;
}

Lexicon load_lexicon(const std::string& path, const Inventory& inventory) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str(), inventory);
}

std::string serialize_lexicon(const Lexicon& lexicon) {
  std::string out;
  for (const auto& [word, variants] : lexicon.entries()) {
    for (const auto& pron : variants) {
      out += word;
      for (const auto& ph : pron) {
        out += ' ';
        out += ph;
      }
      out += '\n';
    }
  }
  return out;
}

std::string bundled_data_path(std::string_view relative) {
  return std::string(VISEMELAB_DATA_DIR) + "/" + std::string(relative);
}

const Lexicon& bundled_lexicon() {
  static const Lexicon lexicon =
      load_lexicon(bundled_data_path("avl2_letters.lex"));
  return lexicon;
}

std::map<std::string, std::size_t> phoneme_histogram(const Lexicon& lexicon) {
  std::map<std::string, std::size_t> counts;
  for (const auto& [word, variants] : lexicon.entries()) {
    for (const auto& pron : variants) {
      for (const auto& ph : pron) {
        if (lexicon.inventory().category(ph) == PhonemeCategory::kSilence) {
          continue;
        }
        ++counts[ph];
      }
    }
  }
  return counts;
}

}  // namespace visemelab
