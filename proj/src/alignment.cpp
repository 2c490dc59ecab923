#include "visemelab/alignment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "visemelab/error.hpp"

namespace visemelab {

int alignment_cost(std::span<const AlignmentStep> steps) {
  int cost = 0;
  for (const auto& s : steps) {
    if (s.kind != StepKind::kMatch) ++cost;
  }
  return cost;
}

std::vector<AlignmentStep> align(std::span<const std::string> reference,
                                 std::span<const std::string> hypothesis) {
  const std::size_t n = reference.size();
  const std::size_t m = hypothesis.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& {
    return d[i * (m + 1) + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = reference[i - 1] == hypothesis[j - 1] ? 0 : 1;
      at(i, j) = std::min({at(i - 1, j - 1) + sub, at(i - 1, j) + 1,
                           at(i, j - 1) + 1});
    }
  }

  std::vector<AlignmentStep> steps;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = reference[i - 1] == hypothesis[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        steps.push_back({same ? StepKind::kMatch : StepKind::kSubstitution,
                         reference[i - 1], hypothesis[j - 1]});
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      steps.push_back({StepKind::kDeletion, reference[i - 1], std::nullopt});
      --i;
    } else {
      steps.push_back({StepKind::kInsertion, std::nullopt, hypothesis[j - 1]});
      --j;
    }
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

ConfusionMatrix::ConfusionMatrix(Inventory inventory)
    : inventory_(std::move(inventory)),
      counts_(inventory_.size() * inventory_.size(), 0) {}

std::int64_t ConfusionMatrix::count(std::string_view ref,
                                    std::string_view hyp) const {
  return count(inventory_.index_of(ref), inventory_.index_of(hyp));
}

void ConfusionMatrix::add(std::size_t ref, std::size_t hyp, std::int64_t n) {
  if (n < 0) throw Error("confusion counts must be nonnegative");
  counts_[ref * size() + hyp] += n;
  if (n > 0) emitted_.insert(inventory_.phonemes()[hyp].symbol());
}

void ConfusionMatrix::mark_emitted(const std::string& symbol) {
  inventory_.index_of(symbol);
  emitted_.insert(symbol);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (!(inventory_ == other.inventory_)) {
    throw Error("cannot merge confusion matrices over different inventories");
  }
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  emitted_.insert(other.emitted_.begin(), other.emitted_.end());
  return *this;
}

ConfusionMatrix accumulate_confusions(std::span<const SequencePair> pairs,
                                      const Inventory& inventory) {
  ConfusionMatrix cm(inventory);
  for (const auto& [ref, hyp] : pairs) {
    for (const auto& step : align(ref, hyp)) {
      if (step.hypothesis) cm.mark_emitted(*step.hypothesis);
      if (step.kind == StepKind::kMatch ||
          step.kind == StepKind::kSubstitution) {
        cm.add(inventory.index_of(*step.reference),
               inventory.index_of(*step.hypothesis));
      }
    }
  }
  return cm;
}

ConfusionMatrix merge_confusions(std::span<const ConfusionMatrix> matrices) {
  if (matrices.empty()) throw Error("nothing to merge");
  ConfusionMatrix out = matrices.front();
  for (std::size_t k = 1; k < matrices.size(); ++k) out += matrices[k];
  return out;
}

std::string serialize_confusions_csv(const ConfusionMatrix& cm) {
  const auto symbols = cm.inventory().symbols();
  std::ostringstream out;
  out << "ref/hyp";
  for (const auto& s : symbols) out << ',' << s;
  out << '\n';
  for (std::size_t r = 0; r < cm.size(); ++r) {
    out << symbols[r];
    for (std::size_t h = 0; h < cm.size(); ++h) out << ',' << cm.count(r, h);
    out << '\n';
  }
  out << "# emitted:";
  // Inventory order, not alphabetical, so the line reads like the header.
  for (const auto& s : symbols) {
    if (cm.emitted().count(s)) out << ' ' << s;
  }
  out << '\n';
  return out.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

ConfusionMatrix parse_confusions_csv(std::string_view text,
                                     const Inventory& inventory) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what);
  };

  std::vector<std::string> header;
  std::vector<std::vector<std::int64_t>> rows;
  std::vector<std::string> row_symbols;
  std::optional<std::vector<std::string>> emitted;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') {
      constexpr std::string_view kTag = "# emitted:";
      if (line.rfind(kTag, 0) == 0) {
        std::istringstream f(line.substr(kTag.size()));
        std::vector<std::string> syms;
        for (std::string s; f >> s;) {
          if (!inventory.contains(s)) fail("unknown phoneme '" + s + "'");
          syms.push_back(s);
        }
        emitted = std::move(syms);
      }
      continue;
    }
    auto cells = split_csv(line);
    if (header.empty()) {
      if (cells.size() < 2) fail("header needs at least one phoneme column");
      header.assign(cells.begin() + 1, cells.end());
      for (const auto& s : header) {
        if (!inventory.contains(s)) fail("unknown phoneme '" + s + "'");
      }
      continue;
    }
    if (cells.size() != header.size() + 1) {
      fail("expected " + std::to_string(header.size() + 1) + " cells, got " +
           std::to_string(cells.size()));
    }
    if (!inventory.contains(cells[0])) {
      fail("unknown phoneme '" + cells[0] + "'");
    }
    std::vector<std::int64_t> values;
    for (std::size_t k = 1; k < cells.size(); ++k) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(cells[k], &used);
      } catch (const std::exception&) {
        fail("bad count '" + cells[k] + "'");
      }
      if (used != cells[k].size() || v < 0) fail("bad count '" + cells[k] + "'");
      values.push_back(v);
    }
    row_symbols.push_back(cells[0]);
    rows.push_back(std::move(values));
  }
  if (header.empty()) throw ParseError("confusion CSV has no header");
  if (row_symbols != header) {
    throw ParseError("row labels must repeat the header symbols in order");
  }

  std::vector<Phoneme> phonemes;
  for (const auto& s : header) phonemes.emplace_back(s, inventory.category(s));
  ConfusionMatrix cm{Inventory(std::move(phonemes))};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t h = 0; h < rows[r].size(); ++h) {
      if (rows[r][h] > 0) cm.add(r, h, rows[r][h]);
    }
  }
  if (emitted) {
    for (const auto& s : *emitted) {
      if (!cm.inventory().contains(s)) {
        throw ParseError("emitted phoneme '" + s + "' not in header");
      }
      cm.mark_emitted(s);
    }
  }
  return cm;
}

ConfusionMatrix load_confusions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open confusion matrix '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_confusions_csv(buf.str());
}

}  // namespace visemelab
