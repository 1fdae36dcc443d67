#ifndef NPN_BASELINES_HPP_
#define NPN_BASELINES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "npn/corpus.hpp"
#include "npn/encoder.hpp"
#include "npn/ndcore.hpp"
#include "npn/prediction.hpp"

namespace npn {

// Tag ids: 0 = O, 1 + 2t = B-t, 2 + 2t = I-t.
inline constexpr int kIobOutside = 0;
constexpr std::size_t iob_tag_count(std::size_t subtypes) { return 2 * subtypes + 1; }
constexpr int iob_begin(int subtype) { return 1 + 2 * subtype; }
constexpr int iob_inside(int subtype) { return 2 + 2 * subtype; }
constexpr bool iob_is_begin(int tag) { return tag > 0 && tag % 2 == 1; }
constexpr int iob_subtype(int tag) { return (tag - 1) / 2; }
std::string iob_tag_name(int tag, const SubtypeInventory& subtypes);

// Per-character tags of the gold triggers. Triggers are placed in (start,
// longest first) order; one overlapping an already tagged character is skipped
// and counted in `skipped`.
std::vector<int> iob_encode(const AnnotatedSentence& sentence, std::size_t* skipped = nullptr);

// Maximal runs B-t (I-t)* become nuggets of type t. An I-t after O or after a tag
// of another type opens a nugget. A type change ends a run. When
// `log_probs` is given, a nugget scores the sum of its tags' log-probabilities.
std::vector<Prediction> iob_decode(std::span<const int> tags, const SubtypeInventory& subtypes,
                                   std::span<const double> log_probs = {});

// Character instances: every tagged character, plus floor(neg_ratio * positives)
// O characters drawn corpus-wide without replacement. `nugget_class` holds the tag.
std::vector<TrainingInstance> make_iob_instances(const Corpus& corpus, double neg_ratio,
                                                 std::uint64_t seed);

// The hybrid encoder with a single softmax over IOB tags on f_N.
class IobModel {
 public:
  IobModel(nd::ParamStore& store, const EncoderConfig& encoder, std::size_t char_vocab,
           std::size_t word_vocab, std::size_t subtype_count);

  std::size_t tag_count() const { return iob_tag_count(subtypes_); }
  const HybridEncoder& encoder() const { return encoder_; }
  const DenseParams& head() const { return head_; }

  nd::Vec tag_distribution(const nd::ParamStore& store, const EncodedSentence& sentence,
                           std::size_t char_index) const;
  double instance_loss(const nd::ParamStore& store, const EncodedSentence& sentence,
                       std::size_t char_index, int gold_tag, nd::GradBuffer* grads,
                       Rng* dropout_rng = nullptr) const;

  struct Tagging {
    std::vector<int> tags;
    std::vector<double> log_probs;  // of the chosen tags
  };
  Tagging tag(const nd::ParamStore& store, const EncodedSentence& sentence) const;
  std::vector<Prediction> predict(const nd::ParamStore& store, const EncodedSentence& sentence,
                                  const SubtypeInventory& subtypes) const;

 private:
  std::size_t subtypes_;
  HybridEncoder encoder_;
  DenseParams head_;
};

// Word instances: `char_index` holds the word index; class 0 = NIL and 1 + t
// for a word whose span equals a gold trigger of subtype t. Every labelled word
// is kept, plus floor(neg_ratio * positives) NIL words sampled corpus-wide.
std::vector<TrainingInstance> make_word_instances(const Corpus& corpus, double neg_ratio,
                                                  std::uint64_t seed);

// Word-level extractor, tanh projection, softmax over NIL and the subtypes. Each
// prediction covers a whole word.
class WordwiseModel {
 public:
  WordwiseModel(nd::ParamStore& store, const ExtractorConfig& extractor, int max_rel_dist,
                std::size_t max_len, std::size_t word_vocab, std::size_t subtype_count);

  std::size_t class_count() const { return subtypes_ + 1; }
  const TokenExtractor& extractor() const { return extractor_; }

  nd::Vec word_distribution(const nd::ParamStore& store, const EncodedSentence& sentence,
                            std::size_t word_index) const;
  double instance_loss(const nd::ParamStore& store, const EncodedSentence& sentence,
                       std::size_t word_index, int gold, nd::GradBuffer* grads) const;
  std::vector<Prediction> predict(const nd::ParamStore& store, const AnnotatedSentence& sentence,
                                  const EncodedSentence& encoded, const SubtypeInventory& subtypes) const;

 private:
  std::size_t subtypes_;
  TokenExtractor extractor_;
  DenseParams proj_;
  DenseParams head_;
};

}  // namespace npn

#endif  // NPN_BASELINES_HPP_
