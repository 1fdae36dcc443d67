#ifndef NPN_CORPUS_HPP_
#define NPN_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "npn/errors.hpp"

namespace npn {

struct EventSubtype {
  std::string name;
  int id = -1;
  friend bool operator==(const EventSubtype&, const EventSubtype&) = default;
};

// Dense, name-sorted subtype ids.
class SubtypeInventory {
 public:
  SubtypeInventory() = default;
  explicit SubtypeInventory(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(std::string_view name) const;
  EventSubtype at(std::string_view name) const;

  friend bool operator==(const SubtypeInventory&, const SubtypeInventory&) = default;

 private:
  std::vector<std::string> names_;
};

struct WordSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  std::size_t length() const { return end - start + 1; }
  friend bool operator==(const WordSpan&, const WordSpan&) = default;
};

struct TriggerNugget {
  std::size_t start = 0;
  std::size_t length = 1;
  EventSubtype subtype;
  std::size_t end() const { return start + length; }  // exclusive
  friend bool operator==(const TriggerNugget&, const TriggerNugget&) = default;
};

struct AnnotatedSentence {
  std::string doc_id;
  std::string sent_id;
  std::u32string chars;
  std::vector<WordSpan> word_spans;
  std::vector<TriggerNugget> triggers;

  std::size_t size() const { return chars.size(); }
  // Index of the word whose span contains `char_index`.
  std::size_t word_index_of(std::size_t char_index) const;
  std::u32string word_text(std::size_t word_index) const;
  friend bool operator==(const AnnotatedSentence&, const AnnotatedSentence&) = default;
};

struct Corpus {
  std::vector<AnnotatedSentence> sentences;
  SubtypeInventory subtypes;

  std::size_t trigger_count() const;
  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Throws ValidationError naming the offending field.
void validate_sentence(const AnnotatedSentence& sentence, std::size_t line = 0);

// One JSON record per line. Subtype ids come from `declared` when given (unknown
// names are rejected), otherwise from the sorted set of names in the file.
Corpus load_corpus(const std::string& path, const SubtypeInventory* declared = nullptr);
Corpus parse_corpus(std::string_view text, const SubtypeInventory* declared = nullptr);
void save_corpus(const std::string& path, const Corpus& corpus);
std::string serialize_sentence(const AnnotatedSentence& sentence);

enum class MatchType { Exact, PartOfWord, CrossWords };
inline constexpr MatchType kAllMatchTypes[] = {MatchType::Exact, MatchType::PartOfWord,
                                               MatchType::CrossWords};
std::string_view to_string(MatchType type);

MatchType classify_match_type(const AnnotatedSentence& sentence, const TriggerNugget& trigger);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();
  Vocabulary(std::vector<std::u32string> chars, std::vector<std::u32string> words,
             int max_rel_dist);

  int char_id(char32_t c) const;
  int word_id(const std::u32string& word) const;
  std::size_t char_count() const { return chars_.size(); }
  std::size_t word_count() const { return words_.size(); }
  const std::vector<std::u32string>& chars() const { return chars_; }
  const std::vector<std::u32string>& words() const { return words_; }

  int max_rel_dist() const { return max_rel_dist_; }
  std::size_t position_count() const { return 2 * static_cast<std::size_t>(max_rel_dist_) + 1; }
  std::size_t position_index(long relative) const;

  // Deterministic text dump, one token per line in id order.
  std::string dump() const;

 private:
  std::vector<std::u32string> chars_;
  std::vector<std::u32string> words_;
  std::map<std::u32string, int> char_ids_;
  std::map<std::u32string, int> word_ids_;
  int max_rel_dist_ = 40;
};

// Ids are assigned by first occurrence in corpus order. Tokens seen fewer than
// `min_count` times map to UNK.
Vocabulary build_vocab(const Corpus& corpus, std::size_t min_count, int max_rel_dist = 40);

// Token ids of a sentence under a vocabulary.
struct EncodedSentence {
  std::vector<int> chars;
  std::vector<int> words;
  std::vector<std::size_t> char_to_word;
};
EncodedSentence encode_sentence(const AnnotatedSentence& sentence, const Vocabulary& vocab);

struct TrainingInstance {
  std::size_t sentence = 0;
  std::size_t char_index = 0;
  int nugget_class = 0;  // 0 = NIL
  std::optional<int> type_label;
};

struct InstanceSets {
  std::vector<TrainingInstance> nugget;  // S_G
  std::vector<TrainingInstance> type;    // S_C
  std::size_t dropped_long_triggers = 0;
  std::size_t negatives_requested = 0;
  bool no_triggers = false;
};

// Negatives are sampled corpus-wide without replacement from characters covered
// by no trigger at all.
InstanceSets make_instances(const Corpus& corpus, double neg_ratio, std::uint64_t seed,
                            int max_nugget_length = 3);

}  // namespace npn

#endif  // NPN_CORPUS_HPP_
