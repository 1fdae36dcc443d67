#include <set>
#include <utility>

#include "doctest.h"
#include "npn/labels.hpp"

using namespace npn;

TEST_CASE("class count matches enumeration of (length, position) pairs") {
  for (int L = 1; L <= 5; ++L) {
    std::set<std::pair<int, int>> pairs;
    for (int l = 1; l <= L; ++l)
      for (int p = 1; p <= l; ++p) pairs.insert({l, p});
    CHECK(nugget_class_count(L) == static_cast<int>(pairs.size()) + 1);
  }
  CHECK(nugget_class_count(3) == 7);
}

TEST_CASE("codec follows (length, position) order") {
  CHECK(encode_label(1, 1, 3) == 1);
  CHECK(encode_label(2, 1, 3) == 2);
  CHECK(encode_label(2, 2, 3) == 3);
  CHECK(encode_label(3, 1, 3) == 4);
  CHECK(encode_label(3, 3, 3) == 6);
  CHECK(encode_label(NuggetLabel::nil(), 3) == 0);
  CHECK(decode_label(0, 3).is_nil());
  CHECK(decode_label(4, 3) == NuggetLabel{3, 1});
}

TEST_CASE("codec is a bijection for L = 1..5") {
  for (int L = 1; L <= 5; ++L) {
    int expected = 1;
    for (int l = 1; l <= L; ++l) {
      for (int p = 1; p <= l; ++p) {
        const int k = encode_label(l, p, L);
        CHECK(k == expected++);
        CHECK(decode_label(k, L) == NuggetLabel{l, p});
      }
    }
    for (int k = 0; k < nugget_class_count(L); ++k) CHECK(encode_label(decode_label(k, L), L) == k);
  }
}

TEST_CASE("codec rejects out-of-range input") {
  CHECK_THROWS_AS(encode_label(4, 1, 3), std::out_of_range);
  CHECK_THROWS_AS(encode_label(2, 3, 3), std::out_of_range);
  CHECK_THROWS_AS(encode_label(1, 0, 3), std::out_of_range);
  CHECK_THROWS_AS(decode_label(7, 3), std::out_of_range);
  CHECK_THROWS_AS(decode_label(-1, 3), std::out_of_range);
}

TEST_CASE("label_for gives the character's place in its trigger") {
  const TriggerNugget t{0, 3, {"Injure", 0}};
  CHECK(label_for(t, 2) == NuggetLabel{3, 3});
  CHECK(label_for(t, 0) == NuggetLabel{3, 1});
  CHECK(label_for(TriggerNugget{5, 1, {"Die", 0}}, 5) == NuggetLabel{1, 1});
  CHECK(label_for(TriggerNugget{5, 2, {"Die", 0}}, 5) == NuggetLabel{2, 1});
  CHECK_THROWS_AS(label_for(t, 3), std::out_of_range);
}
