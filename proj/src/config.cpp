#include "npn/config.hpp"

#include <fstream>
#include <sstream>

#include "npn/json_fields.hpp"
#include "npn/utf8.hpp"

namespace npn {

namespace jf = json_fields;

namespace {

PathsConfig parse_paths(const nlohmann::json& j) {
  const std::string w = "paths";
  jf::reject_unknown(j, w, {"train", "dev", "test", "char_embeddings", "word_embeddings", "output_dir", "checkpoint"});
  PathsConfig p;
  jf::read(j, "train", w, p.train);
  jf::read(j, "dev", w, p.dev);
  jf::read(j, "test", w, p.test);
  jf::read(j, "char_embeddings", w, p.char_embeddings);
  jf::read(j, "word_embeddings", w, p.word_embeddings);
  jf::read(j, "output_dir", w, p.output_dir);
  jf::read(j, "checkpoint", w, p.checkpoint);
  return p;
}

std::u32string read_chars(const nlohmann::json& j, const char* key, const std::string& w, const std::u32string& def) {
  std::string text = utf8::encode(def);
  jf::read(j, key, w, text);
  try {
    return utf8::decode(text);
  } catch (const std::exception&) {
    throw ConfigError(w + "." + key, "invalid UTF-8");
  }
}

GeneratorConfig parse_generator(const nlohmann::json& j) {
  const std::string w = "generator";
  jf::reject_unknown(j, w,
                     {"seed", "train_sentences", "dev_sentences", "test_sentences", "subtypes", "families",
                      "proportions", "distractor_vocab_size", "manner_chars", "light_verbs", "aux_chars",
                      "min_filler_words", "max_filler_words", "no_trigger_prob", "second_trigger_prob",
                      "aux_in_filler_prob", "doc_prefix", "sentences_per_doc"});
  GeneratorConfig g;
  GenSpec& s = g.spec;
  jf::read(j, "seed", w, g.seed);
  jf::read(j, "train_sentences", w, g.train_sentences);
  jf::read(j, "dev_sentences", w, g.dev_sentences);
  jf::read(j, "test_sentences", w, g.test_sentences);
  if (auto it = j.find("subtypes"); it != j.end()) {
    if (!it->is_array()) throw ConfigError(w + ".subtypes", "expected an array");
    s.subtypes.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string ws = w + ".subtypes[" + std::to_string(i) + "]";
      const auto& e = (*it)[i];
      jf::reject_unknown(e, ws, {"name", "central"});
      SubtypeLexicon lex;
      jf::read(e, "name", ws, lex.name);
      lex.central = read_chars(e, "central", ws, U"");
      s.subtypes.push_back(std::move(lex));
    }
  }
  if (auto it = j.find("families"); it != j.end()) {
    const std::string wf = w + ".families";
    jf::reject_unknown(*it, wf, {"single", "manner_verb", "verb_aux_noun"});
    jf::read(*it, "single", wf, s.families.single);
    jf::read(*it, "manner_verb", wf, s.families.manner_verb);
    jf::read(*it, "verb_aux_noun", wf, s.families.verb_aux_noun);
  }
  if (auto it = j.find("proportions"); it != j.end()) {
    if (!it->is_array() || it->size() != 3) {
      throw ConfigError(w + ".proportions", "expected [exact, part_of_word, cross_words]");
    }
    for (std::size_t k = 0; k < 3; ++k) {
      if (!(*it)[k].is_number()) throw ConfigError(w + ".proportions", "expected numbers");
      s.proportions[k] = (*it)[k].get<double>();
    }
  }
  jf::read(j, "distractor_vocab_size", w, s.distractor_vocab_size);
  s.manner_chars = read_chars(j, "manner_chars", w, s.manner_chars);
  s.light_verbs = read_chars(j, "light_verbs", w, s.light_verbs);
  s.aux_chars = read_chars(j, "aux_chars", w, s.aux_chars);
  jf::read(j, "min_filler_words", w, s.min_filler_words);
  jf::read(j, "max_filler_words", w, s.max_filler_words);
  jf::read(j, "no_trigger_prob", w, s.no_trigger_prob);
  jf::read(j, "second_trigger_prob", w, s.second_trigger_prob);
  jf::read(j, "aux_in_filler_prob", w, s.aux_in_filler_prob);
  jf::read(j, "doc_prefix", w, s.doc_prefix);
  jf::read(j, "sentences_per_doc", w, s.sentences_per_doc);
  s.validate();
  return g;
}

nlohmann::json generator_json(const GeneratorConfig& g) {
  const GenSpec& s = g.spec;
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& lex : s.subtypes) subs.push_back({{"name", lex.name}, {"central", utf8::encode(lex.central)}});
  return {
      {"seed", g.seed},
      {"train_sentences", g.train_sentences},
      {"dev_sentences", g.dev_sentences},
      {"test_sentences", g.test_sentences},
      {"subtypes", subs},
      {"families",
       {{"single", s.families.single}, {"manner_verb", s.families.manner_verb},
        {"verb_aux_noun", s.families.verb_aux_noun}}},
      {"proportions", {s.proportions[0], s.proportions[1], s.proportions[2]}},
      {"distractor_vocab_size", s.distractor_vocab_size},
      {"manner_chars", utf8::encode(s.manner_chars)},
      {"light_verbs", utf8::encode(s.light_verbs)},
      {"aux_chars", utf8::encode(s.aux_chars)},
      {"min_filler_words", s.min_filler_words},
      {"max_filler_words", s.max_filler_words},
      {"no_trigger_prob", s.no_trigger_prob},
      {"second_trigger_prob", s.second_trigger_prob},
      {"aux_in_filler_prob", s.aux_in_filler_prob},
      {"doc_prefix", s.doc_prefix},
      {"sentences_per_doc", s.sentences_per_doc},
  };
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j) {
  jf::reject_unknown(j, "config", {"paths", "model", "training", "generator"});
  RunConfig c;
  const nlohmann::json empty = nlohmann::json::object();
  c.paths = parse_paths(j.value("paths", empty));
  c.model = parse_model_config(j.value("model", empty), "model");
  c.training = parse_train_config(j.value("training", empty), "training");
  c.generator = parse_generator(j.value("generator", empty));
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

nlohmann::json run_config_json(const RunConfig& c) {
  return {
      {"paths",
       {{"train", c.paths.train},
        {"dev", c.paths.dev},
        {"test", c.paths.test},
        {"char_embeddings", c.paths.char_embeddings},
        {"word_embeddings", c.paths.word_embeddings},
        {"output_dir", c.paths.output_dir},
        {"checkpoint", c.paths.checkpoint}}},
      {"model", model_config_json(c.model)},
      {"training", train_config_json(c.training)},
      {"generator", generator_json(c.generator)},
  };
}

}  // namespace npn
