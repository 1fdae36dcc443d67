#include "npn/system.hpp"

#include <algorithm>

#include "npn/decoder.hpp"
#include "npn/json_fields.hpp"
#include "npn/utf8.hpp"

namespace npn {

std::string_view to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::Npn: return "npn";
    case SystemKind::Iob: return "iob";
    case SystemKind::Wordwise: return "wordwise";
  }
  return "?";
}

SystemKind parse_system_kind(std::string_view text) {
  if (text == "npn") return SystemKind::Npn;
  if (text == "iob") return SystemKind::Iob;
  if (text == "wordwise") return SystemKind::Wordwise;
  throw ConfigError("model.system", "unknown system '" + std::string(text) + "' (npn, iob, wordwise)");
}

void ModelConfig::validate() const {
  encoder.validate();
  if (max_nugget_length < 1) throw ConfigError("model.max_nugget_length", "must be at least 1");
}

nlohmann::json model_config_json(const ModelConfig& c) {
  const ExtractorConfig& e = c.encoder.extractor;
  return {
      {"system", std::string(to_string(c.system))},
      {"hybrid", std::string(to_string(c.encoder.mode))},
      {"word_branch", c.encoder.word_branch},
      {"max_nugget_length", c.max_nugget_length},
      {"token_emb_dim", e.token_emb_dim},
      {"pos_emb_dim", e.pos_emb_dim},
      {"filters", e.filters},
      {"window", e.window},
      {"lexical_window", e.lexical_window},
      {"proj_dim", e.proj_dim},
      {"max_rel_dist", c.encoder.max_rel_dist},
      {"max_sentence_len", c.encoder.max_sentence_len},
      {"dropout", c.encoder.dropout},
      {"min_count", c.min_count},
  };
}

ModelConfig parse_model_config(const nlohmann::json& j, const std::string& where) {
  namespace jf = json_fields;
  jf::reject_unknown(j, where,
                     {"system", "hybrid", "word_branch", "max_nugget_length", "token_emb_dim", "pos_emb_dim",
                      "filters", "window", "lexical_window", "proj_dim", "max_rel_dist", "max_sentence_len",
                      "dropout", "min_count"});
  ModelConfig c;
  std::string text;
  jf::read(j, "system", where, text);
  if (!text.empty()) c.system = parse_system_kind(text);
  text.clear();
  jf::read(j, "hybrid", where, text);
  if (!text.empty()) c.encoder.mode = parse_hybrid_mode(text);
  ExtractorConfig& e = c.encoder.extractor;
  jf::read(j, "word_branch", where, c.encoder.word_branch);
  jf::read(j, "max_nugget_length", where, c.max_nugget_length);
  jf::read(j, "token_emb_dim", where, e.token_emb_dim);
  jf::read(j, "pos_emb_dim", where, e.pos_emb_dim);
  jf::read(j, "filters", where, e.filters);
  jf::read(j, "window", where, e.window);
  jf::read(j, "lexical_window", where, e.lexical_window);
  jf::read(j, "proj_dim", where, e.proj_dim);
  jf::read(j, "max_rel_dist", where, c.encoder.max_rel_dist);
  jf::read(j, "max_sentence_len", where, c.encoder.max_sentence_len);
  jf::read(j, "dropout", where, c.encoder.dropout);
  jf::read(j, "min_count", where, c.min_count);
  c.validate();
  return c;
}

nlohmann::json vocab_json(const Vocabulary& vocab) {
  auto tokens = [](const std::vector<std::u32string>& table) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 2; i < table.size(); ++i) arr.push_back(utf8::encode(table[i]));
    return arr;
  };
  return {{"max_rel_dist", vocab.max_rel_dist()}, {"chars", tokens(vocab.chars())}, {"words", tokens(vocab.words())}};
}

Vocabulary parse_vocab(const nlohmann::json& j) {
  auto tokens = [&](const char* key) {
    std::vector<std::u32string> out;
    for (const auto& t : j.at(key)) out.push_back(utf8::decode(t.get<std::string>()));
    return out;
  };
  return Vocabulary(tokens("chars"), tokens("words"), j.at("max_rel_dist").get<int>());
}

System::System(const ModelConfig& config, Vocabulary vocab, SubtypeInventory subtypes, std::uint64_t seed)
    : config_(config), vocab_(std::move(vocab)), subtypes_(std::move(subtypes)), store_(seed) {
  config_.validate();
  if (vocab_.max_rel_dist() != config_.encoder.max_rel_dist) {
    throw ConfigError("model.max_rel_dist", "vocabulary uses " + std::to_string(vocab_.max_rel_dist()) +
                                                ", model config " + std::to_string(config_.encoder.max_rel_dist));
  }
  switch (config_.system) {
    case SystemKind::Npn:
      npn_ = std::make_unique<NpnModel>(store_, config_.encoder, config_.max_nugget_length, vocab_.char_count(),
                                        vocab_.word_count(), subtypes_.size());
      break;
    case SystemKind::Iob:
      iob_ = std::make_unique<IobModel>(store_, config_.encoder, vocab_.char_count(), vocab_.word_count(),
                                        subtypes_.size());
      break;
    case SystemKind::Wordwise:
      wordwise_ = std::make_unique<WordwiseModel>(store_, config_.encoder.extractor, config_.encoder.max_rel_dist,
                                                  config_.encoder.max_sentence_len, vocab_.word_count(),
                                                  subtypes_.size());
      break;
  }
}

System::System(System&&) noexcept = default;
System& System::operator=(System&&) noexcept = default;
System::~System() = default;

System System::for_corpus(const ModelConfig& config, const Corpus& train, std::uint64_t seed) {
  return System(config, build_vocab(train, config.min_count, config.encoder.max_rel_dist), train.subtypes, seed);
}

System::EpochData System::sample(const Corpus& corpus, double neg_ratio, std::uint64_t seed) const {
  EpochData d;
  switch (config_.system) {
    case SystemKind::Npn: {
      InstanceSets sets = make_instances(corpus, neg_ratio, seed, config_.max_nugget_length);
      d.primary = std::move(sets.nugget);
      d.secondary = std::move(sets.type);
      break;
    }
    case SystemKind::Iob:
      d.primary = make_iob_instances(corpus, neg_ratio, seed);
      break;
    case SystemKind::Wordwise:
      d.primary = make_word_instances(corpus, neg_ratio, seed);
      break;
  }
  return d;
}

double System::batch_loss(std::span<const EncodedSentence> sentences, std::span<const TrainingInstance> primary,
                          std::span<const TrainingInstance> secondary, nd::GradBuffer* grads,
                          Rng* dropout_rng) const {
  double loss = 0.0;
  for (const auto& inst : primary) {
    const EncodedSentence& s = sentences[inst.sentence];
    if (npn_) {
      loss += npn_->instance_loss(store_, s, inst.char_index, NpnModel::Head::Nugget, inst.nugget_class, grads,
                                  dropout_rng);
    } else if (iob_) {
      loss += iob_->instance_loss(store_, s, inst.char_index, inst.nugget_class, grads, dropout_rng);
    } else {
      loss += wordwise_->instance_loss(store_, s, inst.char_index, inst.nugget_class, grads);
    }
  }
  if (npn_) {
    for (const auto& inst : secondary) {
      if (!inst.type_label) throw std::invalid_argument("type instance without a subtype label");
      loss += npn_->instance_loss(store_, sentences[inst.sentence], inst.char_index, NpnModel::Head::Type,
                                  *inst.type_label, grads, dropout_rng);
    }
  }
  return loss;
}

std::vector<Prediction> System::predict(const AnnotatedSentence& sentence) const {
  const EncodedSentence e = encode(sentence);
  if (npn_) {
    return decode_sentence(sentence.size(), model_scorer(*npn_, store_, e), config_.max_nugget_length, subtypes_);
  }
  if (iob_) return iob_->predict(store_, e, subtypes_);
  return wordwise_->predict(store_, sentence, e, subtypes_);
}

std::vector<SentencePredictions> System::predict(const Corpus& corpus) const {
  std::vector<SentencePredictions> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    out.push_back({s.doc_id, s.sent_id, s.chars, predict(s)});
  }
  return out;
}

std::string System::metadata(const nlohmann::json& extra) const {
  nlohmann::json j;
  j["format"] = "npn-model";
  j["model"] = model_config_json(config_);
  j["vocab"] = vocab_json(vocab_);
  j["subtypes"] = subtypes_.names();
  j["seed"] = store_.seed();
  j["training"] = extra;
  return j.dump();
}

System System::from_checkpoint(const nd::Checkpoint& ck) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ck.metadata);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "npn-model") throw std::runtime_error("checkpoint metadata lacks the npn-model header");
  System s(parse_model_config(j.at("model"), "checkpoint.model"), parse_vocab(j.at("vocab")),
           SubtypeInventory(j.at("subtypes").get<std::vector<std::string>>()), j.at("seed").get<std::uint64_t>());
  nd::restore(s.store_, ck);
  return s;
}

}  // namespace npn
