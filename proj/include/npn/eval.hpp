#ifndef NPN_EVAL_HPP_
#define NPN_EVAL_HPP_

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "npn/corpus.hpp"
#include "npn/prediction.hpp"

namespace npn {

enum class ScoreMode { Identification, Classification };
std::string_view to_string(ScoreMode mode);

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision() const;
  double recall() const;
  double f1() const;
};

struct MatchRecall {
  std::size_t gold = 0;
  std::size_t found = 0;
  double recall() const { return gold == 0 ? 0.0 : static_cast<double>(found) / static_cast<double>(gold); }
};
using MatchRecallTable = std::map<MatchType, MatchRecall>;

struct ScoreReport {
  ScoreMode mode = ScoreMode::Identification;
  Counts counts;
  double precision = 0, recall = 0, f1 = 0;
  std::optional<MatchRecallTable> by_match_type;
  std::map<std::string, Counts> by_subtype;  // classification mode only
};

// Exact-span micro scoring. Within a sentence, predictions claim gold triggers
// greedily by descending score, ties by (start, length, subtype id); each gold
// trigger is matched at most once. Throws ValidationError for predictions naming
// a sentence absent from `gold`.
ScoreReport score(const Corpus& gold, const std::vector<SentencePredictions>& predictions,
                  ScoreMode mode);

MatchRecallTable recall_by_match_type(const Corpus& gold,
                                      const std::vector<SentencePredictions>& predictions);

struct MatchStats {
  std::size_t triggers = 0;
  std::array<std::size_t, 3> counts{};  // indexed like kAllMatchTypes
  std::array<double, 3> shares{};
};
MatchStats corpus_match_stats(const Corpus& corpus);

std::string format_report(const ScoreReport& report);
std::string format_match_table(const MatchRecallTable& table);
std::string format_match_stats(const MatchStats& stats);
nlohmann::json report_json(const ScoreReport& report);
nlohmann::json match_stats_json(const MatchStats& stats);

}  // namespace npn

#endif  // NPN_EVAL_HPP_
