#include "doctest.h"
#include "npn/eval.hpp"
#include "npn/synthetic.hpp"
#include "toy.hpp"

using namespace npn;
using doctest::Approx;

namespace {

Prediction pred(std::size_t start, std::size_t length, const std::string& type, double score = 0.0) {
  return {start, length, {type, -1}, score};
}

std::vector<SentencePredictions> as_predictions(const Corpus& c) {
  std::vector<SentencePredictions> out;
  for (const auto& s : c.sentences) {
    SentencePredictions sp{s.doc_id, s.sent_id, s.chars, {}};
    for (const auto& t : s.triggers) sp.predictions.push_back(pred(t.start, t.length, t.subtype.name));
    out.push_back(sp);
  }
  return out;
}

void check_invariants(const Corpus& gold, const std::vector<SentencePredictions>& preds) {
  const ScoreReport id = score(gold, preds, ScoreMode::Identification);
  const ScoreReport cls = score(gold, preds, ScoreMode::Classification);
  std::size_t n = 0;
  for (const auto& sp : preds) n += sp.predictions.size();
  for (const ScoreReport* r : {&id, &cls}) {
    CHECK(r->counts.tp + r->counts.fn == gold.trigger_count());
    CHECK(r->counts.tp + r->counts.fp == n);
  }
  CHECK(id.f1 >= cls.f1);
  CHECK(id.counts.tp >= cls.counts.tp);
}

}  // namespace

TEST_CASE("hand example: 3 predictions, 2 gold, 1 correct") {
  Corpus gold;
  gold.subtypes = SubtypeInventory({"Die", "Injure"});
  gold.sentences.push_back(toy::make_sentence("0", U"他受了伤死了", {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}},
                                              {{1, 3, gold.subtypes.at("Injure")}, {4, 1, gold.subtypes.at("Die")}}));
  std::vector<SentencePredictions> preds{{"toy", "0", gold.sentences[0].chars,
                                          {pred(1, 3, "Injure"), pred(3, 1, "Injure"), pred(0, 2, "Die")}}};
  const ScoreReport r = score(gold, preds, ScoreMode::Classification);
  CHECK(r.counts.tp == 1);
  CHECK(r.counts.fp == 2);
  CHECK(r.counts.fn == 1);
  CHECK(r.precision == Approx(1.0 / 3.0));
  CHECK(r.recall == Approx(0.5));
  CHECK(r.f1 == Approx(0.4));
  check_invariants(gold, preds);
}

TEST_CASE("identity, empty and wrong-type cases") {
  const Corpus gold = generate_synthetic_corpus(GenSpec{.sentences = 100}, 4);
  const auto perfect = as_predictions(gold);
  for (ScoreMode m : {ScoreMode::Identification, ScoreMode::Classification}) {
    const ScoreReport r = score(gold, perfect, m);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
  }
  for (const auto& [type, cell] : recall_by_match_type(gold, perfect)) {
    if (cell.gold > 0) CHECK(cell.recall() == 1.0);
  }
  const ScoreReport none = score(gold, {}, ScoreMode::Identification);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  for (const auto& [type, cell] : recall_by_match_type(gold, {})) CHECK(cell.recall() == 0.0);

  auto wrong = perfect;
  for (auto& sp : wrong)
    for (auto& p : sp.predictions) p.subtype.name = p.subtype.name == "Die" ? "Attack" : "Die";
  const ScoreReport id = score(gold, wrong, ScoreMode::Identification);
  const ScoreReport cls = score(gold, wrong, ScoreMode::Classification);
  CHECK(id.f1 == 1.0);
  CHECK(cls.counts.tp == 0);
  CHECK(cls.counts.fp == gold.trigger_count());
  CHECK(cls.counts.fn == gold.trigger_count());
  check_invariants(gold, wrong);
}

TEST_CASE("each gold trigger is matched once, highest score first") {
  Corpus gold;
  gold.subtypes = SubtypeInventory({"Die", "Injure"});
  gold.sentences.push_back(toy::make_sentence("0", U"死", {{0, 0}}, {{0, 1, gold.subtypes.at("Die")}}));
  std::vector<SentencePredictions> preds{{"toy", "0", U"死", {pred(0, 1, "Injure", -0.1), pred(0, 1, "Die", -2.0)}}};
  // Identification: the higher-scoring Injure claims the trigger.
  const ScoreReport id = score(gold, preds, ScoreMode::Identification);
  CHECK(id.counts.tp == 1);
  CHECK(id.counts.fp == 1);
  const ScoreReport cls = score(gold, preds, ScoreMode::Classification);
  CHECK(cls.counts.tp == 1);
  CHECK(cls.by_subtype.at("Injure").fp == 1);
  CHECK(cls.by_subtype.at("Die").tp == 1);
}

TEST_CASE("scoring ignores prediction order") {
  const Corpus gold = generate_synthetic_corpus(GenSpec{.sentences = 80}, 6);
  Rng rng(1);
  auto preds = as_predictions(gold);
  for (auto& sp : preds) {
    if (!sp.predictions.empty() && rng.bernoulli(0.3)) sp.predictions.pop_back();
    if (sp.text.size() > 2) sp.predictions.push_back(pred(1, 2, "Attack", rng.uniform(-3, 0)));
    if (!sp.predictions.empty()) sp.predictions[0].subtype.name = "Die";
  }
  const ScoreReport a = score(gold, preds, ScoreMode::Classification);
  for (auto& sp : preds) rng.shuffle(sp.predictions);
  rng.shuffle(preds);
  const ScoreReport b = score(gold, preds, ScoreMode::Classification);
  CHECK(a.counts.tp == b.counts.tp);
  CHECK(a.counts.fp == b.counts.fp);
  CHECK(a.counts.fn == b.counts.fn);
  check_invariants(gold, preds);
}

TEST_CASE("unknown sentences are rejected") {
  const Corpus gold = toy::corpus();
  std::vector<SentencePredictions> preds{{"nope", "0", U"x", {}}};
  CHECK_THROWS_AS(score(gold, preds, ScoreMode::Identification), ValidationError);
}

TEST_CASE("recall by match type on the toy corpus") {
  const Corpus gold = toy::corpus();
  auto preds = as_predictions(gold);
  preds[1].predictions.clear();  // drop the part-of-word trigger
  const MatchRecallTable t = recall_by_match_type(gold, preds);
  CHECK(t.at(MatchType::CrossWords).gold == 1);
  CHECK(t.at(MatchType::CrossWords).recall() == 1.0);
  CHECK(t.at(MatchType::PartOfWord).gold == 3);
  CHECK(t.at(MatchType::PartOfWord).found == 2);
  CHECK(t.at(MatchType::Exact).gold == 0);
  CHECK(t.at(MatchType::Exact).recall() == 0.0);
}

TEST_CASE("corpus match statistics") {
  const MatchStats empty = corpus_match_stats(Corpus{});
  CHECK(empty.triggers == 0);
  for (double s : empty.shares) CHECK(s == 0.0);

  Corpus exact;
  exact.sentences.push_back(toy::make_sentence("0", U"死了", {{0, 0}, {1, 1}}, {{0, 1, {"Die", 0}}}));
  const MatchStats e = corpus_match_stats(exact);
  CHECK(e.shares[0] == 1.0);
  CHECK(e.shares[1] == 0.0);
  CHECK(e.shares[2] == 0.0);

  const Corpus syn = generate_synthetic_corpus(GenSpec{.sentences = 1000}, 10);
  const MatchStats s = corpus_match_stats(syn);
  CHECK(std::abs(s.shares[0] - 0.755) <= 0.03);
  CHECK(std::abs(s.shares[1] - 0.195) <= 0.03);
  CHECK(std::abs(s.shares[2] - 0.05) <= 0.03);
}

TEST_CASE("report formats") {
  const Corpus gold = toy::corpus();
  ScoreReport r = score(gold, as_predictions(gold), ScoreMode::Identification);
  r.by_match_type = recall_by_match_type(gold, as_predictions(gold));
  const nlohmann::json j = report_json(r);
  CHECK(j.at("f1").get<double>() == 1.0);
  CHECK(j.at("recall_by_match_type").at("CrossWords").at("gold") == 1);
  CHECK(format_report(r).find("CrossWords") != std::string::npos);
}
