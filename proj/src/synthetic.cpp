#include "npn/synthetic.hpp"

#include <cmath>
#include <set>

#include "npn/rng.hpp"

namespace npn {

std::vector<SubtypeLexicon> GenSpec::default_subtypes() {
  return {
      {"Attack", U"杀打袭"},   {"Die", U"死亡"},     {"Injure", U"伤"},
      {"Transport", U"运送"},  {"Meet", U"会"},      {"Merge_Org", U"并"},
      {"Transfer_Ownership", U"购买"}, {"Arrest", U"捕抓"},
  };
}

void GenSpec::validate() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < proportions.size(); ++i) {
    if (!(proportions[i] >= 0.0) || proportions[i] > 1.0) {
      throw ConfigError("generator.proportions", "entry " + std::to_string(i) + " must lie in [0, 1]");
    }
    sum += proportions[i];
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw ConfigError("generator.proportions", "must sum to 1 (got " + std::to_string(sum) + ")");
  }
  if (subtypes.empty()) throw ConfigError("generator.subtypes", "at least one subtype required");
  std::set<std::string> names;
  std::set<char32_t> used;
  for (const auto& s : subtypes) {
    if (s.name.empty()) throw ConfigError("generator.subtypes", "subtype name must be non-empty");
    if (!names.insert(s.name).second) throw ConfigError("generator.subtypes", "duplicate subtype '" + s.name + "'");
    if (s.central.empty()) throw ConfigError("generator.subtypes", "subtype '" + s.name + "' has no characters");
    for (char32_t c : s.central) used.insert(c);
  }
  const auto& f = families;
  if (f.single < 0 || f.manner_verb < 0 || f.verb_aux_noun < 0) {
    throw ConfigError("generator.families", "weights must be non-negative");
  }
  if (f.single + f.manner_verb + f.verb_aux_noun <= 0) {
    throw ConfigError("generator.families", "at least one pattern family must have positive weight");
  }
  if (proportions[2] > 0 && f.manner_verb + f.verb_aux_noun <= 0) {
    throw ConfigError("generator.families", "CrossWords share requires a multi-character family");
  }
  if (f.manner_verb > 0 && manner_chars.empty()) throw ConfigError("generator.manner_chars", "empty");
  if (f.verb_aux_noun > 0 && (light_verbs.empty() || aux_chars.empty())) {
    throw ConfigError("generator.light_verbs", "light verbs and auxiliaries required for verb+aux+noun");
  }
  if (distractor_vocab_size < 2) throw ConfigError("generator.distractor_vocab_size", "must be at least 2");
  if (min_filler_words > max_filler_words) {
    throw ConfigError("generator.min_filler_words", "must not exceed max_filler_words");
  }
  if (sentences_per_doc == 0) throw ConfigError("generator.sentences_per_doc", "must be positive");
  for (double p : {no_trigger_prob, second_trigger_prob, aux_in_filler_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("generator", "probabilities must lie in [0, 1]");
  }
}

namespace {

enum class Family { Single, MannerVerb, VerbAuxNoun };

struct Unit {
  std::vector<std::u32string> words;
  bool has_trigger = false;
  std::size_t trigger_offset = 0;
  std::size_t trigger_length = 0;
  int subtype = -1;
};

class Generator {
 public:
  Generator(const GenSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {
    std::set<char32_t> reserved(spec.manner_chars.begin(), spec.manner_chars.end());
    reserved.insert(spec.light_verbs.begin(), spec.light_verbs.end());
    reserved.insert(spec.aux_chars.begin(), spec.aux_chars.end());
    for (const auto& s : spec.subtypes) reserved.insert(s.central.begin(), s.central.end());
    for (char32_t c = 0x4E00; distractors_.size() < spec.distractor_vocab_size; c += 7) {
      if (!reserved.count(c)) distractors_.push_back(c);
    }
    // The filler lexicon depends only on the GenSpec so that splits generated with
    // different seeds share their vocabulary.
    Rng lex(0x13579BDF2468ACEULL);
    for (std::size_t i = 0; i < 2 * spec.distractor_vocab_size; ++i) {
      std::u32string w(1, lex.pick(distractors_));
      if (lex.bernoulli(0.6)) w.push_back(lex.pick(distractors_));
      lexicon_.push_back(std::move(w));
    }
    std::vector<std::string> names;
    for (const auto& s : spec.subtypes) names.push_back(s.name);
    inventory_ = SubtypeInventory(names);
  }

  Corpus run() {
    Corpus corpus;
    corpus.subtypes = inventory_;
    for (std::size_t i = 0; i < spec_.sentences; ++i) corpus.sentences.push_back(sentence(i));
    return corpus;
  }

 private:
  MatchType next_match_type() {
    const auto& p = spec_.proportions;
    const double total = static_cast<double>(assigned_ + 1);
    std::size_t t = 0;
    const double u = rng_.uniform();
    double acc = 0.0;
    for (t = 0; t < 2; ++t) {
      acc += p[t];
      if (u < acc) break;
    }
    // Keep every running share within two triggers of its target.
    if (counts_[t] + 1 > p[t] * total + 2.0 || p[t] == 0.0) {
      std::size_t best = 0;
      double best_deficit = -1e300;
      for (std::size_t k = 0; k < 3; ++k) {
        const double deficit = p[k] * total - static_cast<double>(counts_[k]);
        if (p[k] > 0 && deficit > best_deficit) {
          best_deficit = deficit;
          best = k;
        }
      }
      t = best;
    }
    ++counts_[t];
    ++assigned_;
    return kAllMatchTypes[t];
  }

  Family next_family(bool multi_char_only) {
    const auto& f = spec_.families;
    const double single = multi_char_only ? 0.0 : f.single;
    const double u = rng_.uniform() * (single + f.manner_verb + f.verb_aux_noun);
    if (u < single) return Family::Single;
    if (u < single + f.manner_verb || f.verb_aux_noun <= 0) return Family::MannerVerb;
    return Family::VerbAuxNoun;
  }

  char32_t distractor() { return rng_.pick(distractors_); }

  Unit trigger_unit() {
    const MatchType type = next_match_type();
    const Family family = next_family(type == MatchType::CrossWords);
    const std::size_t subtype_index = rng_.below(spec_.subtypes.size());
    const SubtypeLexicon& lex = spec_.subtypes[subtype_index];
    const char32_t central = lex.central[rng_.below(lex.central.size())];
    std::vector<std::u32string> parts;
    switch (family) {
      case Family::Single: parts = {std::u32string(1, central)}; break;
      case Family::MannerVerb:
        parts = {std::u32string(1, spec_.manner_chars[rng_.below(spec_.manner_chars.size())]),
                 std::u32string(1, central)};
        break;
      case Family::VerbAuxNoun:
        parts = {std::u32string(1, spec_.light_verbs[rng_.below(spec_.light_verbs.size())]),
                 std::u32string(1, spec_.aux_chars[rng_.below(spec_.aux_chars.size())]),
                 std::u32string(1, central)};
        break;
    }
    std::u32string nugget;
    for (const auto& p : parts) nugget += p;

    Unit unit;
    unit.has_trigger = true;
    unit.trigger_length = nugget.size();
    unit.subtype = *inventory_.find(lex.name);
    switch (type) {
      case MatchType::Exact: unit.words = {nugget}; break;
      case MatchType::PartOfWord: {
        const double side = rng_.uniform();
        std::u32string word = nugget;
        if (side < 0.6) {
          word.insert(word.begin(), distractor());
          unit.trigger_offset = 1;
        }
        if (side >= 0.4) word.push_back(distractor());
        unit.words = {word};
        break;
      }
      case MatchType::CrossWords: {
        // Split the nugget at one or more internal boundaries.
        std::vector<std::u32string> words;
        if (parts.size() == 2) {
          words = parts;
        } else {
          const std::size_t split = rng_.below(3);
          if (split == 0) words = parts;
          else if (split == 1) words = {parts[0] + parts[1], parts[2]};
          else words = {parts[0], parts[1] + parts[2]};
        }
        if (rng_.bernoulli(0.3)) {
          words.front().insert(words.front().begin(), distractor());
          unit.trigger_offset = 1;
        }
        if (rng_.bernoulli(0.3)) words.back().push_back(distractor());
        unit.words = std::move(words);
        break;
      }
    }
    return unit;
  }

  AnnotatedSentence sentence(std::size_t index) {
    std::vector<Unit> units;
    const std::size_t fillers =
        spec_.min_filler_words + rng_.below(spec_.max_filler_words - spec_.min_filler_words + 1);
    for (std::size_t i = 0; i < fillers; ++i) {
      Unit u;
      u.words.push_back(rng_.pick(lexicon_));
      if (rng_.bernoulli(spec_.aux_in_filler_prob)) {
        u.words.push_back(std::u32string(1, spec_.aux_chars[rng_.below(spec_.aux_chars.size())]));
      }
      units.push_back(std::move(u));
    }
    std::size_t n_triggers = 0;
    if (!rng_.bernoulli(spec_.no_trigger_prob)) n_triggers = rng_.bernoulli(spec_.second_trigger_prob) ? 2 : 1;
    for (std::size_t k = 0; k < n_triggers; ++k) {
      Unit t = trigger_unit();
      const std::size_t at = rng_.below(units.size() + 1);
      units.insert(units.begin() + static_cast<std::ptrdiff_t>(at), std::move(t));
    }

    AnnotatedSentence s;
    s.doc_id = spec_.doc_prefix + "-" + std::to_string(index / spec_.sentences_per_doc);
    s.sent_id = std::to_string(index);
    for (const Unit& u : units) {
      const std::size_t unit_start = s.chars.size();
      for (const auto& w : u.words) {
        s.word_spans.push_back({s.chars.size(), s.chars.size() + w.size() - 1});
        s.chars += w;
      }
      if (u.has_trigger) {
        TriggerNugget t;
        t.start = unit_start + u.trigger_offset;
        t.length = u.trigger_length;
        t.subtype = {inventory_.name(u.subtype), u.subtype};
        s.triggers.push_back(std::move(t));
      }
    }
    validate_sentence(s);
    return s;
  }

  const GenSpec& spec_;
  Rng rng_;
  std::vector<char32_t> distractors_;
  std::vector<std::u32string> lexicon_;
  SubtypeInventory inventory_;
  std::array<std::size_t, 3> counts_{};
  std::size_t assigned_ = 0;
};

}  // namespace

Corpus generate_synthetic_corpus(const GenSpec& spec, std::uint64_t seed) {
  spec.validate();
  return Generator(spec, seed).run();
}

}  // namespace npn
