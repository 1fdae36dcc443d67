#include <set>

#include "doctest.h"
#include "npn/corpus.hpp"
#include "npn/labels.hpp"
#include "npn/synthetic.hpp"
#include "npn/utf8.hpp"

using namespace npn;

namespace {

const char* kInjure =
    R"({"doc_id":"d","sent_id":"1","text":"他受了伤","words":[[0,0],[1,1],[2,2],[3,3]],"triggers":[{"start":1,"length":3,"type":"Injure"}]})";

AnnotatedSentence sentence(std::u32string text, std::vector<WordSpan> words, std::vector<TriggerNugget> triggers) {
  AnnotatedSentence s;
  s.doc_id = "d";
  s.sent_id = "0";
  s.chars = std::move(text);
  s.word_spans = std::move(words);
  s.triggers = std::move(triggers);
  return s;
}

// Brute force over (trigger, word) pairs.
bool inside_one_word(const AnnotatedSentence& s, const TriggerNugget& t) {
  for (const auto& w : s.word_spans)
    if (t.start >= w.start && t.end() <= w.end + 1) return true;
  return false;
}
bool equals_a_word(const AnnotatedSentence& s, const TriggerNugget& t) {
  for (const auto& w : s.word_spans)
    if (t.start == w.start && t.end() == w.end + 1) return true;
  return false;
}
std::size_t words_touched(const AnnotatedSentence& s, const TriggerNugget& t) {
  std::size_t n = 0;
  for (const auto& w : s.word_spans)
    if (t.start <= w.end && w.start < t.end()) ++n;
  return n;
}

}  // namespace

TEST_CASE("utf8 round trip and rejection") {
  const std::string text = "受了伤 abc";
  CHECK(utf8::encode(utf8::decode(text)) == text);
  CHECK(utf8::decode(text).size() == 7);
  CHECK_THROWS_AS(utf8::decode(std::string("\xe4\xb8", 2)), std::invalid_argument);
  CHECK_THROWS_AS(utf8::decode(std::string("\xff")), std::invalid_argument);
}

TEST_CASE("parse a cross-word trigger record") {
  const Corpus c = parse_corpus(kInjure);
  REQUIRE(c.sentences.size() == 1);
  const auto& s = c.sentences[0];
  CHECK(s.chars == U"他受了伤");
  REQUIRE(s.triggers.size() == 1);
  CHECK(s.triggers[0].subtype.name == "Injure");
  CHECK(s.triggers[0].subtype.id == 0);
  CHECK(classify_match_type(s, s.triggers[0]) == MatchType::CrossWords);
}

TEST_CASE("empty input gives an empty corpus") {
  CHECK(parse_corpus("").sentences.empty());
  CHECK(parse_corpus("\n\n").sentences.empty());
}

TEST_CASE("malformed and invalid records carry the line number") {
  const std::string good = kInjure;
  try {
    parse_corpus(good + "\n{not json");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  const char* oob =
      R"({"doc_id":"d","sent_id":"1","text":"他受","words":[[0,0],[1,1]],"triggers":[{"start":1,"length":2,"type":"Injure"}]})";
  try {
    parse_corpus(good + "\n" + oob);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 2);
    CHECK(e.field() == "triggers");
  }
  const char* gap = R"({"doc_id":"d","sent_id":"1","text":"他受","words":[[0,0]],"triggers":[]})";
  CHECK_THROWS_AS(parse_corpus(gap), ValidationError);
  const char* dup =
      R"({"doc_id":"d","sent_id":"1","text":"伤","words":[[0,0]],"triggers":[{"start":0,"length":1,"type":"Injure"},{"start":0,"length":1,"type":"Injure"}]})";
  CHECK_THROWS_AS(parse_corpus(dup), ValidationError);
}

TEST_CASE("declared inventory rejects unknown subtypes") {
  const SubtypeInventory inv({"Die", "Attack"});
  CHECK(inv.names() == std::vector<std::string>{"Attack", "Die"});
  try {
    parse_corpus(kInjure, &inv);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "type");
  }
}

TEST_CASE("corpus round trip") {
  const Corpus c = generate_synthetic_corpus(GenSpec{.sentences = 50}, 3);
  const Corpus back = parse_corpus([&] {
    std::string text;
    for (const auto& s : c.sentences) text += serialize_sentence(s) + "\n";
    return text;
  }());
  CHECK(back == c);
}

TEST_CASE("match type classification") {
  const auto s = sentence(U"并购受了伤", {{0, 1}, {2, 2}, {3, 3}, {4, 4}}, {});
  CHECK(classify_match_type(s, {0, 1, {"Merge_Org", 0}}) == MatchType::PartOfWord);
  CHECK(classify_match_type(s, {0, 2, {"Merge_Org", 0}}) == MatchType::Exact);
  CHECK(classify_match_type(s, {2, 3, {"Injure", 0}}) == MatchType::CrossWords);
  CHECK(classify_match_type(s, {4, 1, {"Injure", 0}}) == MatchType::Exact);
}

TEST_CASE("match types are exclusive and exhaustive on generated data") {
  const Corpus c = generate_synthetic_corpus(GenSpec{.sentences = 400}, 11);
  for (const auto& s : c.sentences) {
    for (const auto& t : s.triggers) {
      const bool exact = equals_a_word(s, t);
      const bool part = !exact && inside_one_word(s, t);
      const bool cross = words_touched(s, t) >= 2;
      CHECK(int(exact) + int(part) + int(cross) == 1);
      const MatchType m = classify_match_type(s, t);
      CHECK((m == MatchType::Exact) == exact);
      CHECK((m == MatchType::PartOfWord) == part);
      CHECK((m == MatchType::CrossWords) == cross);
    }
  }
}

TEST_CASE("vocabulary reservations and clipping") {
  const Corpus c = parse_corpus(kInjure);
  const Vocabulary v = build_vocab(c, 1, 4);
  CHECK(v.char_count() == 6);
  CHECK(v.char_id(U'他') == 2);
  CHECK(v.char_id(U'受') == 3);
  CHECK(v.char_id(U'猫') == Vocabulary::kUnk);
  CHECK(v.word_id(U"猫") == Vocabulary::kUnk);
  CHECK(v.position_index(0) == 4);
  CHECK(v.position_index(-100) == 0);
  CHECK(v.position_index(100) == 8);
  CHECK(v.position_count() == 9);
  const Vocabulary none = build_vocab(c, 1000000);
  CHECK(none.char_count() == 2);
  CHECK(none.word_count() == 2);
  CHECK(build_vocab(c, 1).dump() == build_vocab(parse_corpus(kInjure), 1).dump());
}

TEST_CASE("instance extraction counts") {
  Corpus c;
  c.sentences.push_back(sentence(U"他受了伤呢啊哦", {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}},
                                 {{1, 3, {"Injure", 0}}}));
  c.subtypes = SubtypeInventory({"Injure"});
  const InstanceSets sets = make_instances(c, 1.0, 5);
  CHECK(sets.type.size() == 3);
  CHECK(sets.nugget.size() == 6);
  std::size_t negatives = 0;
  for (const auto& inst : sets.nugget) {
    if (inst.nugget_class == 0) {
      ++negatives;
      CHECK_FALSE(inst.type_label.has_value());
      CHECK((inst.char_index == 0 || inst.char_index >= 4));
    } else {
      CHECK(inst.type_label.has_value());
    }
  }
  CHECK(negatives == 3);
  CHECK(make_instances(c, 0.0, 5).nugget.size() == 3);
  CHECK(make_instances(c, 1.0, 5).nugget.size() == make_instances(c, 1.0, 5).nugget.size());
}

TEST_CASE("positive instances decode back to their trigger") {
  const Corpus c = generate_synthetic_corpus(GenSpec{.sentences = 200}, 9);
  const InstanceSets sets = make_instances(c, 2.0, 1);
  std::size_t pairs = 0;
  for (const auto& s : c.sentences)
    for (const auto& t : s.triggers) pairs += t.length;
  CHECK(sets.type.size() == pairs);
  for (const auto& inst : sets.type) {
    const NuggetLabel lab = decode_label(inst.nugget_class, 3);
    const std::size_t start = inst.char_index - static_cast<std::size_t>(lab.position - 1);
    bool found = false;
    for (const auto& t : c.sentences[inst.sentence].triggers) {
      found = found || (t.start == start && t.length == static_cast<std::size_t>(lab.length) &&
                        t.subtype.id == *inst.type_label);
    }
    CHECK(found);
  }
}

TEST_CASE("overlapping triggers give one instance per trigger") {
  Corpus c;
  c.sentences.push_back(sentence(U"死伤", {{0, 1}}, {{0, 1, {"Die", 0}}, {0, 2, {"Injure", 1}}}));
  c.subtypes = SubtypeInventory({"Die", "Injure"});
  const InstanceSets sets = make_instances(c, 0.0, 1);
  CHECK(sets.type.size() == 3);
  std::set<int> classes_at_zero;
  for (const auto& inst : sets.type)
    if (inst.char_index == 0) classes_at_zero.insert(inst.nugget_class);
  CHECK(classes_at_zero == std::set<int>{1, 2});
}

TEST_CASE("long triggers are dropped and counted") {
  Corpus c;
  c.sentences.push_back(sentence(U"一二三四五", {{0, 4}}, {{0, 4, {"Meet", 0}}}));
  c.subtypes = SubtypeInventory({"Meet"});
  const InstanceSets sets = make_instances(c, 1.0, 1);
  CHECK(sets.dropped_long_triggers == 1);
  CHECK(sets.type.empty());
  CHECK(sets.no_triggers);
  CHECK(sets.nugget.empty());
}

TEST_CASE("generator proportions, determinism and validation") {
  GenSpec spec;
  spec.sentences = 1000;
  const Corpus a = generate_synthetic_corpus(spec, 42);
  CHECK(a == generate_synthetic_corpus(spec, 42));
  CHECK_FALSE(a == generate_synthetic_corpus(spec, 43));
  std::array<double, 3> n{};
  double total = 0;
  for (const auto& s : a.sentences) {
    for (const auto& t : s.triggers) {
      n[static_cast<std::size_t>(classify_match_type(s, t))] += 1;
      total += 1;
    }
  }
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(n[k] / total - spec.proportions[k]) <= 0.03);

  spec.sentences = 0;
  CHECK(generate_synthetic_corpus(spec, 1).sentences.empty());

  spec.proportions = {0.5, 0.3, 0.1};
  try {
    spec.validate();
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "generator.proportions");
  }
}
