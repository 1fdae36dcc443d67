#ifndef NPN_SYNTHETIC_HPP_
#define NPN_SYNTHETIC_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "npn/corpus.hpp"

namespace npn {

// A subtype and the characters that carry it ("杀" for Attack, "伤" for Injure).
struct SubtypeLexicon {
  std::string name;
  std::u32string central;
};

// How trigger nuggets are composed. Weights are relative; zero disables a family.
struct PatternFamilies {
  double single = 0.5;         // central
  double manner_verb = 0.3;    // manner + central, e.g. 枪杀
  double verb_aux_noun = 0.2;  // light verb + auxiliary + central, e.g. 受了伤
};

struct GenSpec {
  std::size_t sentences = 1000;
  std::vector<SubtypeLexicon> subtypes = default_subtypes();
  PatternFamilies families;
  // Target shares of (Exact, PartOfWord, CrossWords); must sum to 1.
  std::array<double, 3> proportions = {0.755, 0.195, 0.05};
  std::size_t distractor_vocab_size = 300;
  std::u32string manner_chars = U"枪砍射刺炸勒";
  std::u32string light_verbs = U"受挨遭";
  std::u32string aux_chars = U"了";
  std::size_t min_filler_words = 3;
  std::size_t max_filler_words = 8;
  double no_trigger_prob = 0.15;
  double second_trigger_prob = 0.3;
  // Chance that a filler word is followed by an auxiliary, so auxiliaries are
  // not trigger-only characters.
  double aux_in_filler_prob = 0.1;
  std::string doc_prefix = "syn";
  std::size_t sentences_per_doc = 10;

  static std::vector<SubtypeLexicon> default_subtypes();
  // Throws ConfigError naming the offending field.
  void validate() const;
};

Corpus generate_synthetic_corpus(const GenSpec& spec, std::uint64_t seed);

}  // namespace npn

#endif  // NPN_SYNTHETIC_HPP_
