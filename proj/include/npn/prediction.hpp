#ifndef NPN_PREDICTION_HPP_
#define NPN_PREDICTION_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "npn/corpus.hpp"

namespace npn {

struct Prediction {
  std::size_t start = 0;
  std::size_t length = 1;
  EventSubtype subtype;
  double score = 0.0;

  std::size_t end() const { return start + length; }
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

// Orders by (start, length, subtype id).
bool span_order(const Prediction& a, const Prediction& b);

struct SentencePredictions {
  std::string doc_id;
  std::string sent_id;
  std::u32string text;
  std::vector<Prediction> predictions;
  friend bool operator==(const SentencePredictions&, const SentencePredictions&) = default;
};

// Same line framing as the corpus file, with `predictions` instead of gold
// `triggers`. Scores are written with round-trip precision.
std::string serialize_predictions(const SentencePredictions& sp);
std::vector<SentencePredictions> parse_predictions(std::string_view text);
std::vector<SentencePredictions> load_predictions(const std::string& path);
void save_predictions(const std::string& path, const std::vector<SentencePredictions>& all);

}  // namespace npn

#endif  // NPN_PREDICTION_HPP_
