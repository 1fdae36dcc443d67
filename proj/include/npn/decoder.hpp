#ifndef NPN_DECODER_HPP_
#define NPN_DECODER_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "npn/heads.hpp"
#include "npn/prediction.hpp"

namespace npn {

struct DecodeStats {
  std::size_t characters = 0;
  std::size_t nil = 0;
  std::size_t out_of_bounds = 0;
  std::size_t proposals = 0;
};

// First index of the maximum.
std::size_t argmax(std::span<const double> values);

// The nugget proposed at one character: the argmax class (nothing for NIL) decoded
// to the span starting p-1 characters before it. Spans leaving the sentence are
// discarded. Score is log P(nugget) + log P(subtype).
std::optional<Prediction> propose_at(std::size_t sentence_length, std::size_t char_index,
                                     const CharDistributions& dist, int max_nugget_length,
                                     const SubtypeInventory& subtypes, DecodeStats* stats = nullptr);

using CharScorer = std::function<CharDistributions(std::size_t char_index)>;

// Union of per-character proposals. One prediction per span survives: the
// highest score, ties to the lower subtype id. Overlapping spans are all kept.
// Output is ordered by (start, length, subtype id).
std::vector<Prediction> decode_sentence(std::size_t sentence_length, const CharScorer& scorer,
                                        int max_nugget_length, const SubtypeInventory& subtypes,
                                        DecodeStats* stats = nullptr);

// Brute-force re-derivation of decode_sentence over every (character, class)
// pair with explicit set filtering. Sentences longer than 12 are rejected.
std::vector<Prediction> decode_oracle(std::size_t sentence_length, const CharScorer& scorer,
                                      int max_nugget_length, const SubtypeInventory& subtypes);

CharScorer model_scorer(const NpnModel& model, const nd::ParamStore& store,
                        const EncodedSentence& sentence);

}  // namespace npn

#endif  // NPN_DECODER_HPP_
