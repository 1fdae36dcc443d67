#ifndef NPN_SYSTEM_HPP_
#define NPN_SYSTEM_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "npn/baselines.hpp"
#include "npn/corpus.hpp"
#include "npn/heads.hpp"
#include "npn/ndcore.hpp"
#include "npn/prediction.hpp"

namespace npn {

// npn: nugget generator + type classifier; iob: NPN(IOB); wordwise: DMCNN(Word).
enum class SystemKind { Npn, Iob, Wordwise };
std::string_view to_string(SystemKind kind);
SystemKind parse_system_kind(std::string_view text);

struct ModelConfig {
  SystemKind system = SystemKind::Npn;
  EncoderConfig encoder;
  int max_nugget_length = 3;
  std::size_t min_count = 2;  // vocabulary cut-off

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::json model_config_json(const ModelConfig& config);
// Strict: unknown keys are rejected, absent keys keep their defaults. `where`
// prefixes field names in diagnostics.
ModelConfig parse_model_config(const nlohmann::json& j, const std::string& where = "model");

// A model of any kind together with its parameters, vocabulary and subtypes.
class System {
 public:
  System(const ModelConfig& config, Vocabulary vocab, SubtypeInventory subtypes, std::uint64_t seed);
  System(System&&) noexcept;
  System& operator=(System&&) noexcept;
  ~System();

  // Vocabulary from the training corpus, fresh parameters.
  static System for_corpus(const ModelConfig& config, const Corpus& train, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const SubtypeInventory& subtypes() const { return subtypes_; }
  nd::ParamStore& store() { return store_; }
  const nd::ParamStore& store() const { return store_; }

  const NpnModel* npn() const { return npn_.get(); }
  const IobModel* iob() const { return iob_.get(); }
  const WordwiseModel* wordwise() const { return wordwise_.get(); }

  // Instances for one epoch. `secondary` is the type-classifier set and stays
  // empty for the baselines.
  struct EpochData {
    std::vector<TrainingInstance> primary;
    std::vector<TrainingInstance> secondary;
  };
  EpochData sample(const Corpus& corpus, double neg_ratio, std::uint64_t seed) const;

  double batch_loss(std::span<const EncodedSentence> sentences, std::span<const TrainingInstance> primary,
                    std::span<const TrainingInstance> secondary, nd::GradBuffer* grads,
                    Rng* dropout_rng = nullptr) const;

  EncodedSentence encode(const AnnotatedSentence& sentence) const { return encode_sentence(sentence, vocab_); }
  std::vector<Prediction> predict(const AnnotatedSentence& sentence) const;
  std::vector<SentencePredictions> predict(const Corpus& corpus) const;

  // Model config, vocabulary and subtypes as JSON; `extra` is merged under "training".
  std::string metadata(const nlohmann::json& extra = nlohmann::json::object()) const;
  static System from_checkpoint(const nd::Checkpoint& checkpoint);

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  SubtypeInventory subtypes_;
  nd::ParamStore store_;
  std::unique_ptr<NpnModel> npn_;
  std::unique_ptr<IobModel> iob_;
  std::unique_ptr<WordwiseModel> wordwise_;
};

nlohmann::json vocab_json(const Vocabulary& vocab);
Vocabulary parse_vocab(const nlohmann::json& j);

}  // namespace npn

#endif  // NPN_SYSTEM_HPP_
