#include "npn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "npn/decoder.hpp"

namespace npn {

namespace {

std::size_t sample_count(double neg_ratio, std::size_t positives) {
  if (!(neg_ratio >= 0.0)) throw std::invalid_argument("neg_ratio must be non-negative");
  return static_cast<std::size_t>(std::floor(neg_ratio * static_cast<double>(positives)));
}

template <typename T>
void draw_without_replacement(std::vector<T>& pool, std::size_t k, Rng& rng, std::vector<T>& out) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    out.push_back(pool[i]);
  }
}

}  // namespace

std::string iob_tag_name(int tag, const SubtypeInventory& subtypes) {
  if (tag == kIobOutside) return "O";
  return std::string(iob_is_begin(tag) ? "B-" : "I-") + subtypes.name(iob_subtype(tag));
}

std::vector<int> iob_encode(const AnnotatedSentence& sentence, std::size_t* skipped) {
  std::vector<int> tags(sentence.size(), kIobOutside);
  std::vector<const TriggerNugget*> order;
  for (const auto& t : sentence.triggers) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const TriggerNugget* a, const TriggerNugget* b) {
    if (a->start != b->start) return a->start < b->start;
    if (a->length != b->length) return a->length > b->length;
    return a->subtype.id < b->subtype.id;
  });
  std::size_t dropped = 0;
  for (const TriggerNugget* t : order) {
    bool free = true;
    for (std::size_t c = t->start; c < t->end(); ++c) free = free && tags[c] == kIobOutside;
    if (!free) {
      ++dropped;
      continue;
    }
    tags[t->start] = iob_begin(t->subtype.id);
    for (std::size_t c = t->start + 1; c < t->end(); ++c) tags[c] = iob_inside(t->subtype.id);
  }
  if (skipped) *skipped = dropped;
  return tags;
}

std::vector<Prediction> iob_decode(std::span<const int> tags, const SubtypeInventory& subtypes,
                                   std::span<const double> log_probs) {
  std::vector<Prediction> out;
  std::size_t i = 0;
  while (i < tags.size()) {
    if (tags[i] == kIobOutside) {
      ++i;
      continue;
    }
    const int type = iob_subtype(tags[i]);
    std::size_t j = i + 1;
    while (j < tags.size() && tags[j] == iob_inside(type)) ++j;
    Prediction p;
    p.start = i;
    p.length = j - i;
    p.subtype = {subtypes.name(type), type};
    if (!log_probs.empty()) {
      for (std::size_t k = i; k < j; ++k) p.score += log_probs[k];
    }
    out.push_back(std::move(p));
    i = j;
  }
  return out;
}

std::vector<TrainingInstance> make_iob_instances(const Corpus& corpus, double neg_ratio, std::uint64_t seed) {
  std::vector<TrainingInstance> out;
  std::vector<TrainingInstance> pool;
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const std::vector<int> tags = iob_encode(corpus.sentences[si]);
    for (std::size_t c = 0; c < tags.size(); ++c) {
      if (tags[c] == kIobOutside) {
        pool.push_back({si, c, kIobOutside, std::nullopt});
      } else {
        out.push_back({si, c, tags[c], iob_subtype(tags[c])});
      }
    }
  }
  Rng rng(seed);
  draw_without_replacement(pool, sample_count(neg_ratio, out.size()), rng, out);
  return out;
}

IobModel::IobModel(nd::ParamStore& store, const EncoderConfig& encoder, std::size_t char_vocab,
                   std::size_t word_vocab, std::size_t subtype_count)
    : subtypes_(subtype_count), encoder_(store, encoder, char_vocab, word_vocab) {
  if (subtype_count < 1) throw ConfigError("subtypes", "at least one event subtype required");
  head_.weights = store.add("head.iob.w", {tag_count(), encoder_.nugget_dim()}, nd::Init::Xavier);
  head_.bias = store.add("head.iob.b", {tag_count()}, nd::Init::Zeros);
}

nd::Vec IobModel::tag_distribution(const nd::ParamStore& store, const EncodedSentence& sentence,
                                   std::size_t char_index) const {
  FusedFeatures f = encoder_.forward(store, sentence, char_index);
  return nd::softmax(nd::dense(f.nugget.values, store.value(head_.weights), store.value(head_.bias),
                               nd::Activation::None));
}

double IobModel::instance_loss(const nd::ParamStore& store, const EncodedSentence& sentence,
                               std::size_t char_index, int gold_tag, nd::GradBuffer* grads,
                               Rng* dropout_rng) const {
  HybridEncoder::Trace trace;
  FusedFeatures f = encoder_.forward(store, sentence, char_index, grads ? &trace : nullptr, dropout_rng);
  const nd::Vec& input = f.nugget.values;
  nd::Vec scores = nd::dense(input, store.value(head_.weights), store.value(head_.bias), nd::Activation::None);
  nd::XentResult xent = nd::softmax_xent(scores, static_cast<std::size_t>(gold_tag));
  if (grads) {
    nd::Vec g_in(input.size(), 0.0);
    nd::dense_backward(input, store.value(head_.weights), scores, nd::Activation::None, xent.grad,
                       (*grads)[head_.weights], (*grads)[head_.bias], g_in);
    const nd::Vec zero(encoder_.type_dim(), 0.0);
    encoder_.backward(store, trace, g_in, zero, *grads);
  }
  return xent.loss;
}

IobModel::Tagging IobModel::tag(const nd::ParamStore& store, const EncodedSentence& sentence) const {
  Tagging t;
  for (std::size_t i = 0; i < sentence.chars.size(); ++i) {
    const nd::Vec dist = tag_distribution(store, sentence, i);
    const std::size_t best = argmax(dist);
    t.tags.push_back(static_cast<int>(best));
    t.log_probs.push_back(std::log(dist[best]));
  }
  return t;
}

std::vector<Prediction> IobModel::predict(const nd::ParamStore& store, const EncodedSentence& sentence,
                                          const SubtypeInventory& subtypes) const {
  const Tagging t = tag(store, sentence);
  std::vector<Prediction> out = iob_decode(t.tags, subtypes, t.log_probs);
  std::sort(out.begin(), out.end(), span_order);
  return out;
}

std::vector<TrainingInstance> make_word_instances(const Corpus& corpus, double neg_ratio, std::uint64_t seed) {
  std::vector<TrainingInstance> out;
  std::vector<TrainingInstance> pool;
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const AnnotatedSentence& s = corpus.sentences[si];
    for (std::size_t w = 0; w < s.word_spans.size(); ++w) {
      const WordSpan& span = s.word_spans[w];
      std::optional<int> label;
      for (const auto& t : s.triggers) {
        if (t.start == span.start && t.length == span.length() && (!label || t.subtype.id < *label)) {
          label = t.subtype.id;
        }
      }
      if (label) {
        out.push_back({si, w, 1 + *label, *label});
      } else {
        pool.push_back({si, w, 0, std::nullopt});
      }
    }
  }
  Rng rng(seed);
  draw_without_replacement(pool, sample_count(neg_ratio, out.size()), rng, out);
  return out;
}

WordwiseModel::WordwiseModel(nd::ParamStore& store, const ExtractorConfig& extractor, int max_rel_dist,
                             std::size_t max_len, std::size_t word_vocab, std::size_t subtype_count)
    : subtypes_(subtype_count), extractor_(store, "word", word_vocab, extractor, max_rel_dist, max_len) {
  if (subtype_count < 1) throw ConfigError("subtypes", "at least one event subtype required");
  proj_.weights = store.add("proj.word.w", {extractor.proj_dim, extractor.feature_dim()}, nd::Init::Xavier);
  proj_.bias = store.add("proj.word.b", {extractor.proj_dim}, nd::Init::Zeros);
  head_.weights = store.add("head.word.w", {class_count(), extractor.proj_dim}, nd::Init::Xavier);
  head_.bias = store.add("head.word.b", {class_count()}, nd::Init::Zeros);
}

nd::Vec WordwiseModel::word_distribution(const nd::ParamStore& store, const EncodedSentence& sentence,
                                         std::size_t word_index) const {
  const nd::Vec f = extractor_.forward(store, sentence.words, word_index);
  const nd::Vec p = nd::dense(f, store.value(proj_.weights), store.value(proj_.bias), nd::Activation::Tanh);
  return nd::softmax(nd::dense(p, store.value(head_.weights), store.value(head_.bias), nd::Activation::None));
}

double WordwiseModel::instance_loss(const nd::ParamStore& store, const EncodedSentence& sentence,
                                    std::size_t word_index, int gold, nd::GradBuffer* grads) const {
  TokenExtractor::Trace trace;
  const nd::Vec f = extractor_.forward(store, sentence.words, word_index, grads ? &trace : nullptr);
  const nd::Vec p = nd::dense(f, store.value(proj_.weights), store.value(proj_.bias), nd::Activation::Tanh);
  const nd::Vec scores = nd::dense(p, store.value(head_.weights), store.value(head_.bias), nd::Activation::None);
  nd::XentResult xent = nd::softmax_xent(scores, static_cast<std::size_t>(gold));
  if (grads) {
    nd::Vec g_p(p.size(), 0.0), g_f(f.size(), 0.0);
    nd::dense_backward(p, store.value(head_.weights), scores, nd::Activation::None, xent.grad,
                       (*grads)[head_.weights], (*grads)[head_.bias], g_p);
    nd::dense_backward(f, store.value(proj_.weights), p, nd::Activation::Tanh, g_p, (*grads)[proj_.weights],
                       (*grads)[proj_.bias], g_f);
    extractor_.backward(store, trace, g_f, *grads);
  }
  return xent.loss;
}

std::vector<Prediction> WordwiseModel::predict(const nd::ParamStore& store, const AnnotatedSentence& sentence,
                                               const EncodedSentence& encoded,
                                               const SubtypeInventory& subtypes) const {
  std::vector<Prediction> out;
  for (std::size_t w = 0; w < sentence.word_spans.size(); ++w) {
    const nd::Vec dist = word_distribution(store, encoded, w);
    const std::size_t best = argmax(dist);
    if (best == 0) continue;
    const int type = static_cast<int>(best) - 1;
    Prediction p;
    p.start = sentence.word_spans[w].start;
    p.length = sentence.word_spans[w].length();
    p.subtype = {subtypes.name(type), type};
    p.score = std::log(dist[best]);
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), span_order);
  return out;
}

}  // namespace npn
