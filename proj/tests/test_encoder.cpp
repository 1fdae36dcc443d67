#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "npn/encoder.hpp"
#include "toy.hpp"

using namespace npn;
using doctest::Approx;

namespace {

void zero_all(nd::ParamStore& store) {
  for (auto& p : store.params()) std::fill(p.value.begin(), p.value.end(), 0.0);
}

void set(nd::ParamStore& store, nd::ParamId id, std::vector<double> v) {
  REQUIRE(store.at(id).value.size() == v.size());
  store.at(id).value = std::move(v);
}

nd::Vec random_vec(Rng& rng, std::size_t n) {
  nd::Vec v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("feature and hybrid dims") {
  ExtractorConfig e;
  CHECK(e.feature_dim() == 2 * 200 + 3 * 100);
  EncoderConfig c;
  c.mode = HybridMode::Concat;
  CHECK(c.nugget_dim() == 400);
  c.mode = HybridMode::General;
  CHECK(c.nugget_dim() == 200);
  c.mode = HybridMode::TaskSpecific;
  CHECK(c.type_dim() == 200);
  c.mode = HybridMode::Concat;
  c.word_branch = false;
  CHECK(c.nugget_dim() == 200);
  CHECK(parse_hybrid_mode("task_specific") == HybridMode::TaskSpecific);
  CHECK_THROWS_AS(parse_hybrid_mode("sum"), ConfigError);
  e.filters = 0;
  CHECK_THROWS_AS(e.validate(), ConfigError);
}

TEST_CASE("zero parameters extract a zero vector") {
  nd::ParamStore store(1);
  const ExtractorConfig cfg = toy::small_encoder(HybridMode::Concat).extractor;
  TokenExtractor x(store, "char", 10, cfg, 5, 120);
  zero_all(store);
  const std::vector<int> tokens{2, 3, 4, 5};
  const nd::Vec f = x.forward(store, tokens, 2);
  CHECK(f.size() == cfg.feature_dim());
  for (double v : f) CHECK(v == 0.0);
}

TEST_CASE("single-token lexical window is PAD, token, PAD") {
  nd::ParamStore store(2);
  const ExtractorConfig cfg = toy::small_encoder(HybridMode::Concat).extractor;
  TokenExtractor x(store, "char", 10, cfg, 5, 120);
  const std::vector<int> tokens{7};
  const nd::Vec f = x.forward(store, tokens, 0);
  auto emb = store.value(x.embeddings());
  const std::size_t e = cfg.token_emb_dim, m = cfg.filters;
  for (std::size_t d = 0; d < e; ++d) {
    CHECK(f[2 * m + d] == emb[Vocabulary::kPad * e + d]);
    CHECK(f[2 * m + e + d] == emb[7 * e + d]);
    CHECK(f[2 * m + 2 * e + d] == emb[Vocabulary::kPad * e + d]);
  }
  for (std::size_t i = 0; i < m; ++i) CHECK(f[i] == 0.0);
}

TEST_CASE("one filter, window 1, scalar embeddings match a hand evaluation") {
  ExtractorConfig cfg;
  cfg.token_emb_dim = 1;
  cfg.pos_emb_dim = 1;
  cfg.filters = 1;
  cfg.window = 1;
  cfg.lexical_window = 0;
  cfg.proj_dim = 1;
  nd::ParamStore store(3);
  const int R = 2;
  TokenExtractor x(store, "char", 4, cfg, R, 120);
  set(store, x.embeddings(), {0.0, 0.0, 0.5, -1.0});
  set(store, x.positions(), {-0.2, 0.1, 0.3, 0.7, 0.05});  // relative -2..2
  set(store, x.filters(), {0.8, -1.5});
  set(store, x.bias(), {0.1});
  const std::vector<int> tokens{2, 3, 2, 2};
  const std::size_t c = 1;
  const double emb[] = {0.5, -1.0, 0.5, 0.5};
  const double pos[] = {-0.2, 0.1, 0.3, 0.7, 0.05};
  std::vector<double> r;
  for (int j = 0; j < 4; ++j) {
    const int rel = std::clamp(j - static_cast<int>(c), -R, R);
    r.push_back(std::tanh(0.8 * emb[j] - 1.5 * pos[rel + R] + 0.1));
  }
  const nd::Vec f = x.forward(store, tokens, c);
  REQUIRE(f.size() == 3);
  CHECK(f[0] == Approx(r[0]).epsilon(1e-14));
  CHECK(f[1] == Approx(std::max({r[1], r[2], r[3]})).epsilon(1e-14));
  CHECK(f[2] == Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("moving the concerning token changes positions and split only") {
  nd::ParamStore store(4);
  const ExtractorConfig cfg = toy::small_encoder(HybridMode::Concat).extractor;
  TokenExtractor x(store, "char", 10, cfg, 5, 120);
  const std::vector<int> tokens{2, 3, 4, 5, 6};
  TokenExtractor::Trace a, b;
  x.forward(store, tokens, 1, &a);
  x.forward(store, tokens, 3, &b);
  CHECK(a.row_tokens == b.row_tokens);
  CHECK(a.row_positions != b.row_positions);
  CHECK(a.split == 1);
  CHECK(b.split == 3);
}

TEST_CASE("word branch alignment") {
  const Corpus c = toy::corpus();
  const Vocabulary v = build_vocab(c, 1, 5);
  const AnnotatedSentence& s = c.sentences[1];
  const WordAlignment a = word_branch_alignment(s, v, 3);
  CHECK(a.concerning == 1);
  CHECK(a.words[a.concerning] == v.word_id(U"并购"));
  CHECK(word_branch_alignment(s, v, 0).concerning == 0);
  const AnnotatedSentence& single = c.sentences[0];
  for (std::size_t i = 0; i < single.size(); ++i) CHECK(word_branch_alignment(single, v, i).concerning == i);
}

TEST_CASE("projection") {
  EncoderConfig cfg = toy::small_encoder(HybridMode::General);
  nd::ParamStore store(5);
  HybridEncoder enc(store, cfg, 10, 10);
  const std::size_t f = cfg.extractor.feature_dim(), d = cfg.extractor.proj_dim;
  Rng rng(1);
  const nd::Vec v = random_vec(rng, f);
  CHECK_THROWS_AS(enc.project(store, {nd::Vec(d, 0.0), Stage::ProjChar}), std::invalid_argument);

  std::vector<double> w(d * f, 0.0);
  for (std::size_t i = 0; i < d; ++i) w[i * f + i] = 1.0;
  set(store, enc.char_projection().weights, w);
  const FeatureVector p = enc.project(store, {v, Stage::Char});
  CHECK(p.stage == Stage::ProjChar);
  for (std::size_t i = 0; i < d; ++i) CHECK(p.values[i] == Approx(std::tanh(v[i])).epsilon(1e-15));

  const FeatureVector before = enc.project(store, {v, Stage::Word});
  store.at(enc.char_projection().weights).value[0] += 0.5;
  CHECK(enc.project(store, {v, Stage::Word}).values == before.values);

  zero_all(store);
  for (double x : enc.project(store, {v, Stage::Word}).values) CHECK(x == 0.0);
}

TEST_CASE("hybrid algebra on randomized dimensions") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    EncoderConfig cfg = toy::small_encoder(HybridMode::General);
    cfg.extractor.proj_dim = 1 + rng.below(12);
    const std::size_t d = cfg.extractor.proj_dim;
    const nd::Vec a = random_vec(rng, d), b = random_vec(rng, d);
    const FeatureVector fa{a, Stage::ProjChar}, fb{b, Stage::ProjWord};

    {
      nd::ParamStore store(trial);
      HybridEncoder enc(store, cfg, 6, 6);
      FusionTrace t;
      const FusedFeatures f = enc.fuse(store, fa, fb, &t);
      CHECK(f.nugget.values == f.type.values);
      for (std::size_t i = 0; i < d; ++i) {
        CHECK(t.z_nugget[i] > 0.0);
        CHECK(t.z_nugget[i] < 1.0);
        CHECK(f.nugget.values[i] >= std::min(a[i], b[i]) - 1e-15);
        CHECK(f.nugget.values[i] <= std::max(a[i], b[i]) + 1e-15);
      }
      // Saturated gate: z = 1.
      const GateParams& g = *enc.nugget_gate();
      std::fill(store.at(g.w).value.begin(), store.at(g.w).value.end(), 0.0);
      std::fill(store.at(g.u).value.begin(), store.at(g.u).value.end(), 0.0);
      std::fill(store.at(g.b).value.begin(), store.at(g.b).value.end(), 60.0);
      CHECK(enc.fuse(store, fa, fb).nugget.values == a);
      // Zero gate: midpoint.
      std::fill(store.at(g.b).value.begin(), store.at(g.b).value.end(), 0.0);
      const FusedFeatures mid = enc.fuse(store, fa, fb);
      for (std::size_t i = 0; i < d; ++i) CHECK(mid.nugget.values[i] == Approx(0.5 * (a[i] + b[i])).epsilon(1e-15));
    }
    {
      cfg.mode = HybridMode::TaskSpecific;
      nd::ParamStore store(trial + 100);
      HybridEncoder enc(store, cfg, 6, 6);
      const FusedFeatures same = enc.fuse(store, fa, {a, Stage::ProjWord});
      for (std::size_t i = 0; i < d; ++i) {
        CHECK(same.nugget.values[i] == Approx(a[i]).epsilon(1e-15));
        CHECK(same.type.values[i] == Approx(a[i]).epsilon(1e-15));
      }
      FusionTrace t;
      const FusedFeatures f = enc.fuse(store, fa, fb, &t);
      for (std::size_t i = 0; i < d; ++i) {
        CHECK(t.z_type[i] > 0.0);
        CHECK(t.z_type[i] < 1.0);
      }
      store.at(enc.type_gate()->w).value[0] += 1.0;
      CHECK(enc.fuse(store, fa, fb).nugget.values == f.nugget.values);
    }
    {
      cfg.mode = HybridMode::Concat;
      nd::ParamStore store(trial + 200);
      HybridEncoder enc(store, cfg, 6, 6);
      const FusedFeatures f = enc.fuse(store, fa, fb);
      REQUIRE(f.nugget.values.size() == 2 * d);
      CHECK(std::equal(a.begin(), a.end(), f.nugget.values.begin()));
      CHECK(std::equal(b.begin(), b.end(), f.nugget.values.begin() + static_cast<long>(d)));
      CHECK(f.type.values == f.nugget.values);
    }
  }
}

TEST_CASE("fuse rejects mismatched inputs") {
  nd::ParamStore store(6);
  HybridEncoder enc(store, toy::small_encoder(HybridMode::TaskSpecific), 6, 6);
  CHECK_THROWS_AS(enc.fuse(store, {nd::Vec(4), Stage::ProjChar}, {nd::Vec(3), Stage::ProjWord}), std::invalid_argument);
  CHECK_THROWS_AS(enc.fuse(store, {nd::Vec(4), Stage::Char}, {nd::Vec(4), Stage::ProjWord}), std::invalid_argument);
}

TEST_CASE("disabling the word branch leaves f_N = f_T = f'_char") {
  EncoderConfig cfg = toy::small_encoder(HybridMode::TaskSpecific);
  cfg.word_branch = false;
  nd::ParamStore store(7);
  HybridEncoder enc(store, cfg, 10, 10);
  CHECK(enc.word_extractor() == nullptr);
  CHECK_FALSE(store.contains("proj.word.w"));
  const Corpus c = toy::corpus();
  const Vocabulary v = build_vocab(c, 1, 5);
  const EncodedSentence e = encode_sentence(c.sentences[0], v);
  HybridEncoder::Trace t;
  const FusedFeatures f = enc.forward(store, e, 2, &t);
  CHECK(f.nugget.values == t.p_char);
  CHECK(f.type.values == t.p_char);
}

TEST_CASE("pretrained embeddings overwrite matched rows") {
  nd::ParamStore store(8);
  const ExtractorConfig cfg = toy::small_encoder(HybridMode::Concat).extractor;
  TokenExtractor x(store, "char", 4, cfg, 5, 120);
  const std::vector<std::u32string> tokens{U"<pad>", U"<unk>", U"伤", U"死"};
  const auto path = std::string("npn_test_emb.txt");
  {
    std::ofstream out(path);
    out << "2 4\n伤 1 2 3 4\n猫 9 9 9 9\n";
  }
  const auto before = store.at(x.embeddings()).value;
  CHECK(load_pretrained_embeddings(path, tokens, store, x.embeddings()) == 1);
  const auto& after = store.at(x.embeddings()).value;
  CHECK(after[8] == 1.0);
  CHECK(after[11] == 4.0);
  CHECK(after[12] == before[12]);
  {
    std::ofstream out(path);
    out << "伤 1 2 3\n";
  }
  CHECK_THROWS_AS(load_pretrained_embeddings(path, tokens, store, x.embeddings()), ParseError);
  std::remove(path.c_str());
}
