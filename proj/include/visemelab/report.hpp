#ifndef VISEMELAB_REPORT_HPP_
#define VISEMELAB_REPORT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "visemelab/harness.hpp"
#include "visemelab/study.hpp"

namespace visemelab {

struct SpecSummary {
  ExperimentSpec spec;
  Correctness correctness;  // over every fold of every seed
  int folds = 0;
  friend bool operator==(const SpecSummary&, const SpecSummary&) = default;
};

struct FamilySummary {
  Family family = Family::kSSD;
  Correctness correctness;  // over all folds of all specs in the family
  int folds = 0;
  std::vector<SpecSummary> specs;
  friend bool operator==(const FamilySummary&, const FamilySummary&) = default;
};

struct HomophoneRow {
  std::uint64_t seed = 0;
  std::string designation;
  std::size_t unique_words = 0;  // T
  std::vector<std::vector<std::string>> collisions;
  friend bool operator==(const HomophoneRow&, const HomophoneRow&) = default;
};

// SSD correctness the original recordings gave speakers 1 and 4; printed
// for context only.
inline constexpr double kReferenceSsdSpeaker1 = 0.159;
inline constexpr double kReferenceSsdSpeaker4 = 0.384;

struct Report {
  std::vector<FamilySummary> families;
  std::vector<HomophoneRow> homophones;
  std::optional<ScoreMatrix> scores;  // needs both SSD and DSD results
  std::map<std::string, double> reference = {{"ssd_speaker1", kReferenceSsdSpeaker1},
                                             {"ssd_speaker4", kReferenceSsdSpeaker4}};

  bool empty() const { return families.empty() && homophones.empty(); }
  const FamilySummary* family(Family f) const;
  friend bool operator==(const Report&, const Report&) = default;
};

Report build_report(const StudyResult& result);

std::string render_report(const Report& report);
nlohmann::ordered_json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& doc);

}  // namespace visemelab

#endif  // VISEMELAB_REPORT_HPP_
