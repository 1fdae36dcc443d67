#include "doctest.h"
#include "npn/decoder.hpp"
#include "toy.hpp"

using namespace npn;

namespace {

CharDistributions one_hot(int nugget_class, int subtype, std::size_t classes = 7, std::size_t subtypes = 2) {
  CharDistributions d{nd::Vec(classes, 0.01), nd::Vec(subtypes, 0.1)};
  d.nugget[static_cast<std::size_t>(nugget_class)] = 0.9;
  d.type[static_cast<std::size_t>(subtype)] = 0.8;
  return d;
}

CharScorer table_scorer(const std::vector<CharDistributions>& t) {
  return [&t](std::size_t i) { return t.at(i); };
}

const SubtypeInventory kSubs({"Die", "Injure"});

}  // namespace

TEST_CASE("propose_at materializes the argmax class") {
  DecodeStats stats;
  CHECK_FALSE(propose_at(5, 2, one_hot(0, 0), 3, kSubs, &stats));
  CHECK(stats.nil == 1);
  const auto p = propose_at(5, 4, one_hot(6, 1), 3, kSubs);
  REQUIRE(p);
  CHECK(p->start == 2);
  CHECK(p->length == 3);
  CHECK(p->subtype.name == "Injure");
  CHECK(p->score == doctest::Approx(std::log(0.9) + std::log(0.8)));
  CHECK_FALSE(propose_at(5, 0, one_hot(3, 0), 3, kSubs, &stats));
  CHECK(stats.out_of_bounds == 1);
  CHECK_FALSE(propose_at(2, 1, one_hot(4, 0), 3, kSubs));  // (3,1) at the last char runs past the end
}

TEST_CASE("redundant proposals with a NIL character in the middle") {
  const std::vector<CharDistributions> t{one_hot(4, 1), one_hot(0, 0), one_hot(1, 1)};
  const auto out = decode_sentence(3, table_scorer(t), 3, kSubs);
  REQUIRE(out.size() == 2);
  CHECK(out[0].start == 0);
  CHECK(out[0].length == 3);
  CHECK(out[1].start == 2);
  CHECK(out[1].length == 1);
  CHECK(out == decode_oracle(3, table_scorer(t), 3, kSubs));
}

TEST_CASE("crafted model realizes the same proposals") {
  auto m = toy::crafted_injure_model();
  const EncodedSentence e = encode_sentence(m->corpus.sentences[0], m->vocab);
  CHECK(argmax(m->model->distributions(m->store, e, 0).nugget) == 4);
  CHECK(argmax(m->model->distributions(m->store, e, 1).nugget) == 0);
  CHECK(argmax(m->model->distributions(m->store, e, 2).nugget) == 1);
  const auto out = decode_sentence(3, model_scorer(*m->model, m->store, e), 3, m->corpus.subtypes);
  REQUIRE(out.size() == 2);
  CHECK((out[0].start == 0 && out[0].length == 3 && out[0].subtype.name == "Injure"));
  CHECK((out[1].start == 2 && out[1].length == 1 && out[1].subtype.name == "Injure"));
  CHECK(out == decode_oracle(3, model_scorer(*m->model, m->store, e), 3, m->corpus.subtypes));
}

TEST_CASE("duplicates merge and same-span type conflicts keep the best") {
  // (2,2) at 1 and (2,1) at 0 both give span [0,2).
  std::vector<CharDistributions> t{one_hot(2, 0), one_hot(3, 0), one_hot(0, 0)};
  auto out = decode_sentence(3, table_scorer(t), 3, kSubs);
  REQUIRE(out.size() == 1);
  t[1] = one_hot(3, 1);
  t[1].type[1] = 0.95;  // Injure scores higher at character 1
  out = decode_sentence(3, table_scorer(t), 3, kSubs);
  REQUIRE(out.size() == 1);
  CHECK(out[0].subtype.name == "Injure");
  t[1] = one_hot(3, 1);  // equal scores: lower id wins
  out = decode_sentence(3, table_scorer(t), 3, kSubs);
  REQUIRE(out.size() == 1);
  CHECK(out[0].subtype.name == "Die");
}

TEST_CASE("degenerate sentences") {
  const std::vector<CharDistributions> nil(4, one_hot(0, 0));
  CHECK(decode_sentence(4, table_scorer(nil), 3, kSubs).empty());
  CHECK(decode_sentence(0, table_scorer(nil), 3, kSubs).empty());
  CHECK(decode_oracle(0, table_scorer(nil), 3, kSubs).empty());
  const std::vector<CharDistributions> one{one_hot(1, 0)};
  CHECK(decode_sentence(1, table_scorer(one), 3, kSubs).size() == 1);
  CHECK_THROWS(decode_oracle(13, table_scorer(nil), 3, kSubs));
}

TEST_CASE("decoder equals the brute-force oracle on random tables") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int L = 1 + static_cast<int>(rng.below(4));
    const std::size_t n = rng.below(13);
    const auto table = toy::random_table(rng, n, static_cast<std::size_t>(nugget_class_count(L)), 2);
    const auto fast = decode_sentence(n, table_scorer(table), L, kSubs);
    CHECK(fast == decode_oracle(n, table_scorer(table), L, kSubs));
    for (const auto& p : fast) CHECK(p.end() <= n);
  }
}
