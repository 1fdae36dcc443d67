#ifndef NPN_ENCODER_HPP_
#define NPN_ENCODER_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "npn/corpus.hpp"
#include "npn/ndcore.hpp"
#include "npn/rng.hpp"

namespace npn {

enum class HybridMode { Concat, General, TaskSpecific };
std::string_view to_string(HybridMode mode);
HybridMode parse_hybrid_mode(std::string_view text);

enum class Branch { Char, Word };

struct ExtractorConfig {
  std::size_t token_emb_dim = 100;
  std::size_t pos_emb_dim = 5;
  std::size_t filters = 200;
  std::size_t window = 3;
  std::size_t lexical_window = 1;  // tokens appended on each side of the concerning one
  std::size_t proj_dim = 200;

  std::size_t feature_dim() const { return 2 * filters + (2 * lexical_window + 1) * token_emb_dim; }
  void validate() const;
  friend bool operator==(const ExtractorConfig&, const ExtractorConfig&) = default;
};

struct EncoderConfig {
  ExtractorConfig extractor;
  HybridMode mode = HybridMode::TaskSpecific;
  bool word_branch = true;
  int max_rel_dist = 40;
  std::size_t max_sentence_len = 120;
  double dropout = 0.0;  // on the projected branch features, training only

  std::size_t nugget_dim() const;
  std::size_t type_dim() const;
  void validate() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

enum class Stage { Char, Word, ProjChar, ProjWord, Concat, General, Nugget, Type };
std::string_view to_string(Stage stage);

struct FeatureVector {
  nd::Vec values;
  Stage stage = Stage::Char;
};

// The convolutional extractor for one branch: token and relative-position
// embeddings, a tanh convolution padded so output j aligns with token j, dynamic
// multi-pooling split at the concerning token, then the embeddings of tokens
// within `lexical_window` of it.
class TokenExtractor {
 public:
  TokenExtractor(nd::ParamStore& store, const std::string& prefix, std::size_t vocab_size,
                 const ExtractorConfig& config, int max_rel_dist, std::size_t max_len);

  std::size_t output_dim() const { return config_.feature_dim(); }
  std::size_t input_dim() const { return config_.token_emb_dim + config_.pos_emb_dim; }

  struct Trace {
    std::size_t rows = 0;
    std::size_t split = 0;
    nd::Vec inputs;
    std::vector<int> row_tokens;
    std::vector<std::size_t> row_positions;
    nd::Tensor map;
    nd::PoolResult pool;
    std::vector<int> lexical_tokens;
  };

  nd::Vec forward(const nd::ParamStore& store, std::span<const int> tokens, std::size_t c,
                  Trace* trace = nullptr) const;
  void backward(const nd::ParamStore& store, const Trace& trace, std::span<const double> grad,
                nd::GradBuffer& grads) const;

  nd::ParamId embeddings() const { return emb_; }
  nd::ParamId positions() const { return pos_; }
  nd::ParamId filters() const { return conv_w_; }
  nd::ParamId bias() const { return conv_b_; }

 private:
  std::size_t position_index(long relative) const;

  ExtractorConfig config_;
  int max_rel_dist_;
  std::size_t max_len_;
  nd::ParamId emb_, pos_, conv_w_, conv_b_;
};

struct DenseParams {
  nd::ParamId weights = 0;
  nd::ParamId bias = 0;
};

struct GateParams {
  nd::ParamId w = 0;  // applied to f'_char
  nd::ParamId u = 0;  // applied to f'_word
  nd::ParamId b = 0;
};

struct WordAlignment {
  std::vector<int> words;
  std::size_t concerning = 0;
};
WordAlignment word_branch_alignment(const AnnotatedSentence& sentence, const Vocabulary& vocab,
                                    std::size_t char_index);

struct FusionTrace {
  nd::Vec z_nugget;  // z_G in General mode
  nd::Vec z_type;
};

struct FusedFeatures {
  FeatureVector nugget;  // f_N
  FeatureVector type;    // f_T
};

// Gated convex combination z * a + (1 - z) * b with z = s(W a + U b + bias).
nd::Vec gate(const nd::ParamStore& store, const GateParams& params, std::span<const double> a,
             std::span<const double> b, nd::Vec* z_out = nullptr);

class HybridEncoder {
 public:
  HybridEncoder(nd::ParamStore& store, const EncoderConfig& config, std::size_t char_vocab,
                std::size_t word_vocab);

  const EncoderConfig& config() const { return config_; }
  std::size_t nugget_dim() const { return config_.nugget_dim(); }
  std::size_t type_dim() const { return config_.type_dim(); }

  FeatureVector extract(const nd::ParamStore& store, Branch branch, std::span<const int> tokens,
                        std::size_t c) const;
  // Throws std::invalid_argument unless `f` is an f_char or f_word vector.
  FeatureVector project(const nd::ParamStore& store, const FeatureVector& f) const;
  FusedFeatures fuse(const nd::ParamStore& store, const FeatureVector& f_char,
                     const FeatureVector& f_word, FusionTrace* trace = nullptr) const;

  struct Trace {
    TokenExtractor::Trace char_trace, word_trace;
    nd::Vec f_char, f_word;            // extractor outputs
    nd::Vec p_char, p_word;            // projected, before dropout
    nd::Vec d_char, d_word;            // after dropout
    nd::Vec mask_char, mask_word;      // dropout scale per unit, empty when off
    FusionTrace fusion;
  };

  FusedFeatures forward(const nd::ParamStore& store, const EncodedSentence& sentence,
                        std::size_t char_index, Trace* trace = nullptr,
                        Rng* dropout_rng = nullptr) const;
  void backward(const nd::ParamStore& store, const Trace& trace, std::span<const double> grad_nugget,
                std::span<const double> grad_type, nd::GradBuffer& grads) const;

  const TokenExtractor& char_extractor() const { return char_; }
  const TokenExtractor* word_extractor() const { return word_ ? &*word_ : nullptr; }
  const DenseParams& char_projection() const { return proj_char_; }
  const std::optional<DenseParams>& word_projection() const { return proj_word_; }
  const std::optional<GateParams>& nugget_gate() const { return gate_nugget_; }
  const std::optional<GateParams>& type_gate() const { return gate_type_; }

 private:
  EncoderConfig config_;
  TokenExtractor char_;
  std::optional<TokenExtractor> word_;
  DenseParams proj_char_;
  std::optional<DenseParams> proj_word_;
  std::optional<GateParams> gate_nugget_;  // the single gate in General mode
  std::optional<GateParams> gate_type_;
};

// Loads "token v1 ... vd" lines into rows of an embedding table; tokens absent
// from `tokens` are ignored and unmatched rows keep their initialization.
// Returns the number of rows overwritten.
std::size_t load_pretrained_embeddings(const std::string& path,
                                       const std::vector<std::u32string>& tokens,
                                       nd::ParamStore& store, nd::ParamId table);

}  // namespace npn

#endif  // NPN_ENCODER_HPP_
