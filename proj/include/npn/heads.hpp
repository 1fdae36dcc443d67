#ifndef NPN_HEADS_HPP_
#define NPN_HEADS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "npn/corpus.hpp"
#include "npn/encoder.hpp"
#include "npn/labels.hpp"
#include "npn/ndcore.hpp"

namespace npn {

struct CharDistributions {
  nd::Vec nugget;  // over d^N nugget classes, class 0 = NIL
  nd::Vec type;    // over d^T subtypes
};

// Hybrid encoder plus the trigger nugget generator (dense + softmax over d^N
// classes on f_N) and the event type classifier (dense + softmax over d^T
// subtypes on f_T).
class NpnModel {
 public:
  NpnModel(nd::ParamStore& store, const EncoderConfig& encoder, int max_nugget_length,
           std::size_t char_vocab, std::size_t word_vocab, std::size_t subtype_count);

  int max_nugget_length() const { return max_length_; }
  std::size_t nugget_classes() const { return static_cast<std::size_t>(nugget_class_count(max_length_)); }
  std::size_t subtype_count() const { return subtypes_; }
  const HybridEncoder& encoder() const { return encoder_; }
  const DenseParams& nugget_head() const { return nugget_head_; }
  const DenseParams& type_head() const { return type_head_; }

  nd::Vec nugget_scores(const nd::ParamStore& store, std::span<const double> f_nugget) const;
  nd::Vec type_scores(const nd::ParamStore& store, std::span<const double> f_type) const;
  nd::Vec nugget_distribution(const nd::ParamStore& store, std::span<const double> f_nugget) const;
  nd::Vec type_distribution(const nd::ParamStore& store, std::span<const double> f_type) const;

  CharDistributions distributions(const nd::ParamStore& store, const EncodedSentence& sentence,
                                  std::size_t char_index) const;

  enum class Head { Nugget, Type };
  // -log P(gold) for one instance; accumulates gradients when `grads` is set.
  double instance_loss(const nd::ParamStore& store, const EncodedSentence& sentence,
                       std::size_t char_index, Head head, int gold, nd::GradBuffer* grads,
                       Rng* dropout_rng = nullptr) const;

  // Sum of nugget cross-entropy over `batch_nugget` and type cross-entropy over
  // `batch_type`; instances index into `sentences`.
  double joint_loss(const nd::ParamStore& store, std::span<const EncodedSentence> sentences,
                    std::span<const TrainingInstance> batch_nugget,
                    std::span<const TrainingInstance> batch_type, nd::GradBuffer* grads) const;

 private:
  int max_length_;
  std::size_t subtypes_;
  HybridEncoder encoder_;
  DenseParams nugget_head_;
  DenseParams type_head_;
};

}  // namespace npn

#endif  // NPN_HEADS_HPP_
