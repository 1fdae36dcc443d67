#include "npn/heads.hpp"

namespace npn {

NpnModel::NpnModel(nd::ParamStore& store, const EncoderConfig& encoder, int max_nugget_length,
                   std::size_t char_vocab, std::size_t word_vocab, std::size_t subtype_count)
    : max_length_(max_nugget_length),
      subtypes_(subtype_count),
      encoder_(store, encoder, char_vocab, word_vocab) {
  if (max_nugget_length < 1) throw ConfigError("model.max_nugget_length", "must be at least 1");
  if (subtype_count < 1) throw ConfigError("subtypes", "at least one event subtype required");
  nugget_head_.weights = store.add("head.nugget.w", {nugget_classes(), encoder_.nugget_dim()}, nd::Init::Xavier);
  nugget_head_.bias = store.add("head.nugget.b", {nugget_classes()}, nd::Init::Zeros);
  type_head_.weights = store.add("head.type.w", {subtypes_, encoder_.type_dim()}, nd::Init::Xavier);
  type_head_.bias = store.add("head.type.b", {subtypes_}, nd::Init::Zeros);
}

nd::Vec NpnModel::nugget_scores(const nd::ParamStore& store, std::span<const double> f) const {
  return nd::dense(f, store.value(nugget_head_.weights), store.value(nugget_head_.bias), nd::Activation::None);
}

nd::Vec NpnModel::type_scores(const nd::ParamStore& store, std::span<const double> f) const {
  return nd::dense(f, store.value(type_head_.weights), store.value(type_head_.bias), nd::Activation::None);
}

nd::Vec NpnModel::nugget_distribution(const nd::ParamStore& store, std::span<const double> f) const {
  return nd::softmax(nugget_scores(store, f));
}

nd::Vec NpnModel::type_distribution(const nd::ParamStore& store, std::span<const double> f) const {
  return nd::softmax(type_scores(store, f));
}

CharDistributions NpnModel::distributions(const nd::ParamStore& store, const EncodedSentence& sentence,
                                          std::size_t char_index) const {
  FusedFeatures f = encoder_.forward(store, sentence, char_index);
  return {nugget_distribution(store, f.nugget.values), type_distribution(store, f.type.values)};
}

double NpnModel::instance_loss(const nd::ParamStore& store, const EncodedSentence& sentence,
                               std::size_t char_index, Head head, int gold, nd::GradBuffer* grads,
                               Rng* dropout_rng) const {
  HybridEncoder::Trace trace;
  FusedFeatures f = encoder_.forward(store, sentence, char_index, grads ? &trace : nullptr, dropout_rng);
  const DenseParams& p = head == Head::Nugget ? nugget_head_ : type_head_;
  const nd::Vec& input = head == Head::Nugget ? f.nugget.values : f.type.values;
  nd::Vec scores = nd::dense(input, store.value(p.weights), store.value(p.bias), nd::Activation::None);
  nd::XentResult xent = nd::softmax_xent(scores, static_cast<std::size_t>(gold));
  if (grads) {
    nd::Vec g_in(input.size(), 0.0);
    nd::dense_backward(input, store.value(p.weights), scores, nd::Activation::None, xent.grad,
                       (*grads)[p.weights], (*grads)[p.bias], g_in);
    const nd::Vec zero(input.size(), 0.0);
    if (head == Head::Nugget) {
      encoder_.backward(store, trace, g_in, zero, *grads);
    } else {
      encoder_.backward(store, trace, zero, g_in, *grads);
    }
  }
  return xent.loss;
}

double NpnModel::joint_loss(const nd::ParamStore& store, std::span<const EncodedSentence> sentences,
                            std::span<const TrainingInstance> batch_nugget,
                            std::span<const TrainingInstance> batch_type, nd::GradBuffer* grads) const {
  double loss = 0.0;
  for (const auto& inst : batch_nugget) {
    loss += instance_loss(store, sentences[inst.sentence], inst.char_index, Head::Nugget,
                          inst.nugget_class, grads);
  }
  for (const auto& inst : batch_type) {
    if (!inst.type_label) throw std::invalid_argument("type instance without a subtype label");
    loss += instance_loss(store, sentences[inst.sentence], inst.char_index, Head::Type,
                          *inst.type_label, grads);
  }
  return loss;
}

}  // namespace npn
