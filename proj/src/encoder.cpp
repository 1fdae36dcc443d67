#include "npn/encoder.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "npn/utf8.hpp"

namespace npn {

std::string_view to_string(HybridMode mode) {
  switch (mode) {
    case HybridMode::Concat: return "concat";
    case HybridMode::General: return "general";
    case HybridMode::TaskSpecific: return "task_specific";
  }
  return "?";
}

HybridMode parse_hybrid_mode(std::string_view text) {
  if (text == "concat") return HybridMode::Concat;
  if (text == "general") return HybridMode::General;
  if (text == "task_specific") return HybridMode::TaskSpecific;
  throw ConfigError("model.hybrid", "unknown hybrid mode '" + std::string(text) +
                                        "' (expected concat, general or task_specific)");
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Char: return "f_char";
    case Stage::Word: return "f_word";
    case Stage::ProjChar: return "f'_char";
    case Stage::ProjWord: return "f'_word";
    case Stage::Concat: return "f_C";
    case Stage::General: return "f_G";
    case Stage::Nugget: return "f_N";
    case Stage::Type: return "f_T";
  }
  return "?";
}

void ExtractorConfig::validate() const {
  auto positive = [](std::size_t v, const char* field) {
    if (v == 0) throw ConfigError(std::string("model.") + field, "must be positive");
  };
  positive(token_emb_dim, "token_emb_dim");
  positive(pos_emb_dim, "pos_emb_dim");
  positive(filters, "filters");
  positive(window, "window");
  positive(proj_dim, "proj_dim");
}

std::size_t EncoderConfig::nugget_dim() const {
  if (word_branch && mode == HybridMode::Concat) return 2 * extractor.proj_dim;
  return extractor.proj_dim;
}

std::size_t EncoderConfig::type_dim() const { return nugget_dim(); }

void EncoderConfig::validate() const {
  extractor.validate();
  if (max_rel_dist < 1) throw ConfigError("model.max_rel_dist", "must be positive");
  if (max_sentence_len < 1) throw ConfigError("model.max_sentence_len", "must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model.dropout", "must lie in [0, 1)");
}

TokenExtractor::TokenExtractor(nd::ParamStore& store, const std::string& prefix,
                               std::size_t vocab_size, const ExtractorConfig& config,
                               int max_rel_dist, std::size_t max_len)
    : config_(config), max_rel_dist_(max_rel_dist), max_len_(max_len) {
  config_.validate();
  const std::size_t positions = 2 * static_cast<std::size_t>(max_rel_dist) + 1;
  emb_ = store.add(prefix + ".emb", {vocab_size, config.token_emb_dim}, nd::Init::Embedding);
  pos_ = store.add(prefix + ".pos", {positions, config.pos_emb_dim}, nd::Init::Embedding);
  conv_w_ = store.add(prefix + ".conv.w", {config.filters, config.window * input_dim()}, nd::Init::Xavier);
  conv_b_ = store.add(prefix + ".conv.b", {config.filters}, nd::Init::Zeros);
}

std::size_t TokenExtractor::position_index(long relative) const {
  const long m = max_rel_dist_;
  return static_cast<std::size_t>(std::clamp(relative, -m, m) + m);
}

nd::Vec TokenExtractor::forward(const nd::ParamStore& store, std::span<const int> tokens,
                                std::size_t c, Trace* trace) const {
  const std::size_t n = tokens.size();
  if (c >= n) {
    throw std::out_of_range("concerning index " + std::to_string(c) + " outside sequence of length " +
                            std::to_string(n));
  }
  const std::size_t len = std::min(n, max_len_);
  std::size_t lo = 0;
  if (len < n) lo = std::min(c > len / 2 ? c - len / 2 : 0, n - len);
  const std::size_t split = c - lo;
  const std::size_t h = config_.window;
  const std::size_t left_pad = (h - 1) / 2;
  const std::size_t rows = len + h - 1;
  const std::size_t e = config_.token_emb_dim;
  const std::size_t p = config_.pos_emb_dim;
  const std::size_t in = e + p;

  Trace local;
  Trace& t = trace ? *trace : local;
  t.rows = rows;
  t.split = split;
  t.inputs.assign(rows * in, 0.0);
  t.row_tokens.assign(rows, Vocabulary::kPad);
  t.row_positions.assign(rows, 0);
  auto emb = store.value(emb_);
  auto pos = store.value(pos_);
  for (std::size_t r = 0; r < rows; ++r) {
    const long i = static_cast<long>(r) - static_cast<long>(left_pad);
    const int tok = (i >= 0 && i < static_cast<long>(len)) ? tokens[lo + static_cast<std::size_t>(i)] : Vocabulary::kPad;
    const std::size_t pi = position_index(i - static_cast<long>(split));
    t.row_tokens[r] = tok;
    t.row_positions[r] = pi;
    std::copy_n(emb.data() + static_cast<std::size_t>(tok) * e, e, t.inputs.data() + r * in);
    std::copy_n(pos.data() + pi * p, p, t.inputs.data() + r * in + e);
  }
  t.map = nd::conv1d_tanh(t.inputs, rows, in, store.value(conv_w_), store.value(conv_b_), h);
  t.pool = nd::dynamic_multi_pool(t.map, split);

  const std::size_t m = config_.filters;
  const std::size_t w = config_.lexical_window;
  nd::Vec out(output_dim(), 0.0);
  std::copy(t.pool.left.begin(), t.pool.left.end(), out.begin());
  std::copy(t.pool.right.begin(), t.pool.right.end(), out.begin() + static_cast<std::ptrdiff_t>(m));
  t.lexical_tokens.assign(2 * w + 1, Vocabulary::kPad);
  for (std::size_t k = 0; k < 2 * w + 1; ++k) {
    const long i = static_cast<long>(c) + static_cast<long>(k) - static_cast<long>(w);
    if (i >= 0 && i < static_cast<long>(n)) t.lexical_tokens[k] = tokens[static_cast<std::size_t>(i)];
    std::copy_n(emb.data() + static_cast<std::size_t>(t.lexical_tokens[k]) * e, e,
                out.data() + 2 * m + k * e);
  }
  return out;
}

void TokenExtractor::backward(const nd::ParamStore& store, const Trace& t,
                              std::span<const double> grad, nd::GradBuffer& grads) const {
  const std::size_t m = config_.filters;
  const std::size_t e = config_.token_emb_dim;
  const std::size_t p = config_.pos_emb_dim;
  const std::size_t in = e + p;
  auto g_emb = grads[emb_];
  auto g_pos = grads[pos_];

  for (std::size_t k = 0; k < t.lexical_tokens.size(); ++k) {
    double* row = g_emb.data() + static_cast<std::size_t>(t.lexical_tokens[k]) * e;
    const double* g = grad.data() + 2 * m + k * e;
    for (std::size_t d = 0; d < e; ++d) row[d] += g[d];
  }

  nd::Tensor g_map(t.map.shape);
  nd::dynamic_multi_pool_backward(t.pool, grad.subspan(0, m), grad.subspan(m, m), g_map);
  nd::Vec g_inputs(t.inputs.size(), 0.0);
  nd::conv1d_tanh_backward(t.inputs, t.rows, in, store.value(conv_w_), config_.window, t.map,
                           g_map.data, grads[conv_w_], grads[conv_b_], g_inputs);
  for (std::size_t r = 0; r < t.rows; ++r) {
    const double* g = g_inputs.data() + r * in;
    double* ge = g_emb.data() + static_cast<std::size_t>(t.row_tokens[r]) * e;
    double* gp = g_pos.data() + t.row_positions[r] * p;
    for (std::size_t d = 0; d < e; ++d) ge[d] += g[d];
    for (std::size_t d = 0; d < p; ++d) gp[d] += g[e + d];
  }
}

WordAlignment word_branch_alignment(const AnnotatedSentence& sentence, const Vocabulary& vocab,
                                    std::size_t char_index) {
  WordAlignment a;
  for (std::size_t w = 0; w < sentence.word_spans.size(); ++w) a.words.push_back(vocab.word_id(sentence.word_text(w)));
  a.concerning = sentence.word_index_of(char_index);
  return a;
}

nd::Vec gate(const nd::ParamStore& store, const GateParams& params, std::span<const double> a,
             std::span<const double> b, nd::Vec* z_out) {
  const std::size_t d = a.size();
  if (b.size() != d) {
    throw std::invalid_argument("gate: input dims differ (" + std::to_string(d) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  auto w = store.value(params.w);
  auto u = store.value(params.u);
  auto bias = store.value(params.b);
  if (w.size() != d * d || u.size() != d * d || bias.size() != d) {
    throw std::invalid_argument("gate: parameter shapes do not match input dim " + std::to_string(d));
  }
  nd::Vec z(d), out(d);
  for (std::size_t i = 0; i < d; ++i) {
    z[i] = nd::sigmoid(nd::dot(w.data() + i * d, a.data(), d) + nd::dot(u.data() + i * d, b.data(), d) + bias[i]);
    out[i] = z[i] * a[i] + (1.0 - z[i]) * b[i];
  }
  if (z_out) *z_out = std::move(z);
  return out;
}

namespace {

GateParams add_gate(nd::ParamStore& store, const std::string& prefix, std::size_t d) {
  GateParams g;
  g.w = store.add(prefix + ".w", {d, d}, nd::Init::Xavier);
  g.u = store.add(prefix + ".u", {d, d}, nd::Init::Xavier);
  g.b = store.add(prefix + ".b", {d}, nd::Init::Zeros);
  return g;
}

DenseParams add_dense(nd::ParamStore& store, const std::string& prefix, std::size_t out, std::size_t in) {
  DenseParams p;
  p.weights = store.add(prefix + ".w", {out, in}, nd::Init::Xavier);
  p.bias = store.add(prefix + ".b", {out}, nd::Init::Zeros);
  return p;
}

// Accumulates gradients of z*a + (1-z)*b w.r.t. gate params and both inputs.
void gate_backward(const nd::ParamStore& store, const GateParams& params, std::span<const double> a,
                   std::span<const double> b, std::span<const double> z, std::span<const double> g,
                   nd::GradBuffer& grads, std::span<double> grad_a, std::span<double> grad_b) {
  const std::size_t d = a.size();
  auto w = store.value(params.w);
  auto u = store.value(params.u);
  auto gw = grads[params.w];
  auto gu = grads[params.u];
  auto gb = grads[params.b];
  for (std::size_t i = 0; i < d; ++i) {
    if (g[i] == 0.0) continue;
    grad_a[i] += g[i] * z[i];
    grad_b[i] += g[i] * (1.0 - z[i]);
    const double pre = g[i] * (a[i] - b[i]) * z[i] * (1.0 - z[i]);
    if (pre == 0.0) continue;
    gb[i] += pre;
    double* gwr = gw.data() + i * d;
    double* gur = gu.data() + i * d;
    const double* wr = w.data() + i * d;
    const double* ur = u.data() + i * d;
    for (std::size_t k = 0; k < d; ++k) {
      gwr[k] += pre * a[k];
      gur[k] += pre * b[k];
      grad_a[k] += pre * wr[k];
      grad_b[k] += pre * ur[k];
    }
  }
}

}  // namespace

HybridEncoder::HybridEncoder(nd::ParamStore& store, const EncoderConfig& config,
                             std::size_t char_vocab, std::size_t word_vocab)
    : config_(config),
      char_(store, "char", char_vocab, config.extractor, config.max_rel_dist, config.max_sentence_len) {
  config_.validate();
  const std::size_t d = config.extractor.proj_dim;
  const std::size_t f = config.extractor.feature_dim();
  if (config.word_branch) {
    word_.emplace(store, "word", word_vocab, config.extractor, config.max_rel_dist, config.max_sentence_len);
  }
  proj_char_ = add_dense(store, "proj.char", d, f);
  if (config.word_branch) {
    proj_word_ = add_dense(store, "proj.word", d, f);
    if (config.mode == HybridMode::General) {
      gate_nugget_ = add_gate(store, "gate.general", d);
    } else if (config.mode == HybridMode::TaskSpecific) {
      gate_nugget_ = add_gate(store, "gate.nugget", d);
      gate_type_ = add_gate(store, "gate.type", d);
    }
  }
}

FeatureVector HybridEncoder::extract(const nd::ParamStore& store, Branch branch,
                                     std::span<const int> tokens, std::size_t c) const {
  if (branch == Branch::Char) return {char_.forward(store, tokens, c), Stage::Char};
  if (!word_) throw std::logic_error("word branch is disabled");
  return {word_->forward(store, tokens, c), Stage::Word};
}

FeatureVector HybridEncoder::project(const nd::ParamStore& store, const FeatureVector& f) const {
  const DenseParams* p = nullptr;
  Stage out = Stage::ProjChar;
  if (f.stage == Stage::Char) {
    p = &proj_char_;
  } else if (f.stage == Stage::Word && proj_word_) {
    p = &*proj_word_;
    out = Stage::ProjWord;
  } else {
    throw std::invalid_argument("project: expected f_char or f_word, got " + std::string(to_string(f.stage)));
  }
  return {nd::dense(f.values, store.value(p->weights), store.value(p->bias), nd::Activation::Tanh), out};
}

FusedFeatures HybridEncoder::fuse(const nd::ParamStore& store, const FeatureVector& f_char,
                                  const FeatureVector& f_word, FusionTrace* trace) const {
  if (f_char.stage != Stage::ProjChar) {
    throw std::invalid_argument("fuse: expected f'_char, got " + std::string(to_string(f_char.stage)));
  }
  if (!config_.word_branch) return {{f_char.values, Stage::Nugget}, {f_char.values, Stage::Type}};
  if (f_word.stage != Stage::ProjWord) {
    throw std::invalid_argument("fuse: expected f'_word, got " + std::string(to_string(f_word.stage)));
  }
  if (f_char.values.size() != f_word.values.size()) {
    throw std::invalid_argument("fuse: dims differ (" + std::to_string(f_char.values.size()) + " vs " +
                                std::to_string(f_word.values.size()) + ")");
  }
  FusionTrace local;
  FusionTrace& t = trace ? *trace : local;
  switch (config_.mode) {
    case HybridMode::Concat: {
      nd::Vec c = f_char.values;
      c.insert(c.end(), f_word.values.begin(), f_word.values.end());
      return {{c, Stage::Nugget}, {c, Stage::Type}};
    }
    case HybridMode::General: {
      nd::Vec g = gate(store, *gate_nugget_, f_char.values, f_word.values, &t.z_nugget);
      return {{g, Stage::Nugget}, {g, Stage::Type}};
    }
    case HybridMode::TaskSpecific: {
      nd::Vec fn = gate(store, *gate_nugget_, f_char.values, f_word.values, &t.z_nugget);
      nd::Vec ft = gate(store, *gate_type_, f_char.values, f_word.values, &t.z_type);
      return {{std::move(fn), Stage::Nugget}, {std::move(ft), Stage::Type}};
    }
  }
  throw std::logic_error("unreachable hybrid mode");
}

FusedFeatures HybridEncoder::forward(const nd::ParamStore& store, const EncodedSentence& sentence,
                                     std::size_t char_index, Trace* trace, Rng* dropout_rng) const {
  Trace local;
  Trace& t = trace ? *trace : local;
  t.f_char = char_.forward(store, sentence.chars, char_index, &t.char_trace);
  t.p_char = nd::dense(t.f_char, store.value(proj_char_.weights), store.value(proj_char_.bias), nd::Activation::Tanh);
  if (word_) {
    t.f_word = word_->forward(store, sentence.words, sentence.char_to_word.at(char_index), &t.word_trace);
    t.p_word = nd::dense(t.f_word, store.value(proj_word_->weights), store.value(proj_word_->bias), nd::Activation::Tanh);
  }
  auto apply_dropout = [&](const nd::Vec& in, nd::Vec& mask, nd::Vec& out) {
    out = in;
    mask.clear();
    if (!dropout_rng || config_.dropout <= 0.0) return;
    const double keep = 1.0 - config_.dropout;
    mask.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
      mask[i] = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
      out[i] *= mask[i];
    }
  };
  apply_dropout(t.p_char, t.mask_char, t.d_char);
  if (word_) apply_dropout(t.p_word, t.mask_word, t.d_word);
  return fuse(store, {t.d_char, Stage::ProjChar}, {t.d_word, Stage::ProjWord}, &t.fusion);
}

void HybridEncoder::backward(const nd::ParamStore& store, const Trace& t,
                             std::span<const double> grad_nugget, std::span<const double> grad_type,
                             nd::GradBuffer& grads) const {
  const std::size_t d = config_.extractor.proj_dim;
  nd::Vec g_char(d, 0.0), g_word(word_ ? d : 0, 0.0);
  auto add = [](std::span<double> dst, std::span<const double> src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  };
  if (!word_) {
    add(g_char, grad_nugget);
    add(g_char, grad_type);
  } else {
    switch (config_.mode) {
      case HybridMode::Concat:
        add(g_char, grad_nugget.subspan(0, d));
        add(g_char, grad_type.subspan(0, d));
        add(g_word, grad_nugget.subspan(d, d));
        add(g_word, grad_type.subspan(d, d));
        break;
      case HybridMode::General: {
        nd::Vec g(d);
        for (std::size_t i = 0; i < d; ++i) g[i] = grad_nugget[i] + grad_type[i];
        gate_backward(store, *gate_nugget_, t.d_char, t.d_word, t.fusion.z_nugget, g, grads, g_char, g_word);
        break;
      }
      case HybridMode::TaskSpecific:
        gate_backward(store, *gate_nugget_, t.d_char, t.d_word, t.fusion.z_nugget, grad_nugget, grads, g_char, g_word);
        gate_backward(store, *gate_type_, t.d_char, t.d_word, t.fusion.z_type, grad_type, grads, g_char, g_word);
        break;
    }
  }
  if (!t.mask_char.empty()) for (std::size_t i = 0; i < d; ++i) g_char[i] *= t.mask_char[i];
  if (!t.mask_word.empty()) for (std::size_t i = 0; i < d; ++i) g_word[i] *= t.mask_word[i];

  nd::Vec gf_char(t.f_char.size(), 0.0);
  nd::dense_backward(t.f_char, store.value(proj_char_.weights), t.p_char, nd::Activation::Tanh, g_char,
                     grads[proj_char_.weights], grads[proj_char_.bias], gf_char);
  char_.backward(store, t.char_trace, gf_char, grads);
  if (word_) {
    nd::Vec gf_word(t.f_word.size(), 0.0);
    nd::dense_backward(t.f_word, store.value(proj_word_->weights), t.p_word, nd::Activation::Tanh, g_word,
                       grads[proj_word_->weights], grads[proj_word_->bias], gf_word);
    word_->backward(store, t.word_trace, gf_word, grads);
  }
}

std::size_t load_pretrained_embeddings(const std::string& path,
                                       const std::vector<std::u32string>& tokens,
                                       nd::ParamStore& store, nd::ParamId table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file '" + path + "'");
  const nd::Parameter& p = store.at(table);
  const std::size_t dim = p.shape.at(1);
  std::map<std::u32string, std::size_t> rows;
  for (std::size_t i = 2; i < tokens.size(); ++i) rows.emplace(tokens[i], i);
  auto values = store.mutable_value(table);
  std::string line;
  std::size_t line_no = 0, loaded = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    std::vector<double> vec;
    double v;
    while (ss >> v) vec.push_back(v);
    if (line_no == 1 && vec.size() == 1) continue;  // "count dim" header
    if (vec.size() != dim) {
      throw ParseError(line_no, "embedding for '" + token + "' has " + std::to_string(vec.size()) +
                                    " components, expected " + std::to_string(dim));
    }
    std::u32string key;
    try {
      key = utf8::decode(token);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    auto it = rows.find(key);
    if (it == rows.end()) continue;
    std::copy(vec.begin(), vec.end(), values.begin() + static_cast<std::ptrdiff_t>(it->second * dim));
    ++loaded;
  }
  return loaded;
}

}  // namespace npn
