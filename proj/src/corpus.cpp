#include "npn/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "npn/labels.hpp"
#include "npn/rng.hpp"
#include "npn/utf8.hpp"

namespace npn {

using nlohmann::json;

SubtypeInventory::SubtypeInventory(std::vector<std::string> names) : names_(std::move(names)) {
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
}

std::optional<int> SubtypeInventory::find(std::string_view name) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) return std::nullopt;
  return static_cast<int>(it - names_.begin());
}

EventSubtype SubtypeInventory::at(std::string_view name) const {
  auto id = find(name);
  if (!id) throw std::out_of_range("unknown event subtype '" + std::string(name) + "'");
  return {std::string(name), *id};
}

std::size_t AnnotatedSentence::word_index_of(std::size_t char_index) const {
  auto it = std::upper_bound(word_spans.begin(), word_spans.end(), char_index,
                             [](std::size_t c, const WordSpan& w) { return c < w.start; });
  if (it == word_spans.begin() || char_index >= chars.size()) {
    throw std::out_of_range("character " + std::to_string(char_index) + " not in any word");
  }
  return static_cast<std::size_t>(it - word_spans.begin()) - 1;
}

std::u32string AnnotatedSentence::word_text(std::size_t word_index) const {
  const WordSpan& w = word_spans.at(word_index);
  return chars.substr(w.start, w.length());
}

std::size_t Corpus::trigger_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.triggers.size();
  return n;
}

void validate_sentence(const AnnotatedSentence& s, std::size_t line) {
  const std::size_t n = s.chars.size();
  std::size_t expected = 0;
  for (std::size_t i = 0; i < s.word_spans.size(); ++i) {
    const WordSpan& w = s.word_spans[i];
    if (w.start != expected) {
      throw ValidationError(line, "words", "span " + std::to_string(i) + " starts at " +
                                               std::to_string(w.start) + ", expected " +
                                               std::to_string(expected));
    }
    if (w.end < w.start || w.end >= n) {
      throw ValidationError(line, "words", "span " + std::to_string(i) + " end " +
                                               std::to_string(w.end) + " out of range");
    }
    expected = w.end + 1;
  }
  if (expected != n) {
    throw ValidationError(line, "words", "spans cover " + std::to_string(expected) + " of " +
                                             std::to_string(n) + " characters");
  }
  std::set<std::tuple<std::size_t, std::size_t, std::string>> seen;
  for (std::size_t i = 0; i < s.triggers.size(); ++i) {
    const TriggerNugget& t = s.triggers[i];
    if (t.length < 1) throw ValidationError(line, "triggers", "trigger " + std::to_string(i) + " has length 0");
    if (t.start >= n || t.length > n - t.start) {
      throw ValidationError(line, "triggers", "trigger " + std::to_string(i) + " [" +
                                                  std::to_string(t.start) + ", " +
                                                  std::to_string(t.end()) +
                                                  ") exceeds sentence length " +
                                                  std::to_string(n));
    }
    if (!seen.emplace(t.start, t.length, t.subtype.name).second) {
      throw ValidationError(line, "triggers", "duplicate trigger " + std::to_string(i));
    }
  }
}

namespace {

std::size_t as_index(const json& v, std::size_t line, const char* field) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ParseError(line, std::string("field '") + field + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  return *it;
}

AnnotatedSentence parse_record(std::string_view text, std::size_t line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line, "record must be a JSON object");
  AnnotatedSentence s;
  const json& doc = require(j, "doc_id", line);
  const json& sent = require(j, "sent_id", line);
  const json& txt = require(j, "text", line);
  if (!doc.is_string() || !sent.is_string() || !txt.is_string()) {
    throw ParseError(line, "fields 'doc_id', 'sent_id', 'text' must be strings");
  }
  s.doc_id = doc.get<std::string>();
  s.sent_id = sent.get<std::string>();
  try {
    s.chars = utf8::decode(txt.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, std::string("field 'text': ") + e.what());
  }
  const json& words = require(j, "words", line);
  if (!words.is_array()) throw ParseError(line, "field 'words' must be an array");
  for (const json& w : words) {
    if (!w.is_array() || w.size() != 2) throw ParseError(line, "each word must be a [start, end] pair");
    s.word_spans.push_back({as_index(w[0], line, "words"), as_index(w[1], line, "words")});
  }
  if (auto it = j.find("triggers"); it != j.end()) {
    if (!it->is_array()) throw ParseError(line, "field 'triggers' must be an array");
    for (const json& t : *it) {
      if (!t.is_object()) throw ParseError(line, "each trigger must be an object");
      const json& type = require(t, "type", line);
      if (!type.is_string()) throw ParseError(line, "trigger 'type' must be a string");
      TriggerNugget nugget;
      nugget.start = as_index(require(t, "start", line), line, "start");
      nugget.length = as_index(require(t, "length", line), line, "length");
      nugget.subtype.name = type.get<std::string>();
      s.triggers.push_back(std::move(nugget));
    }
  }
  validate_sentence(s, line);
  return s;
}

}  // namespace

Corpus parse_corpus(std::string_view text, const SubtypeInventory* declared) {
  Corpus corpus;
  std::vector<std::size_t> lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    corpus.sentences.push_back(parse_record(line, line_no));
    lines.push_back(line_no);
  }
  if (declared) {
    corpus.subtypes = *declared;
  } else {
    std::vector<std::string> names;
    for (const auto& s : corpus.sentences)
      for (const auto& t : s.triggers) names.push_back(t.subtype.name);
    corpus.subtypes = SubtypeInventory(std::move(names));
  }
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    for (auto& t : corpus.sentences[i].triggers) {
      auto id = corpus.subtypes.find(t.subtype.name);
      if (!id) throw ValidationError(lines[i], "type", "unknown event subtype '" + t.subtype.name + "'");
      t.subtype.id = *id;
    }
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, const SubtypeInventory* declared) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), declared);
}

std::string serialize_sentence(const AnnotatedSentence& s) {
  json j;
  j["doc_id"] = s.doc_id;
  j["sent_id"] = s.sent_id;
  j["text"] = utf8::encode(s.chars);
  json words = json::array();
  for (const auto& w : s.word_spans) words.push_back({w.start, w.end});
  j["words"] = std::move(words);
  json triggers = json::array();
  for (const auto& t : s.triggers) {
    triggers.push_back({{"start", t.start}, {"length", t.length}, {"type", t.subtype.name}});
  }
  j["triggers"] = std::move(triggers);
  return j.dump();
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file '" + path + "'");
  for (const auto& s : corpus.sentences) out << serialize_sentence(s) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string_view to_string(MatchType type) {
  switch (type) {
    case MatchType::Exact: return "Exact";
    case MatchType::PartOfWord: return "PartOfWord";
    case MatchType::CrossWords: return "CrossWords";
  }
  return "?";
}

MatchType classify_match_type(const AnnotatedSentence& s, const TriggerNugget& t) {
  const std::size_t first = s.word_index_of(t.start);
  const std::size_t last = s.word_index_of(t.end() - 1);
  if (first != last) return MatchType::CrossWords;
  const WordSpan& w = s.word_spans[first];
  return (w.start == t.start && w.length() == t.length) ? MatchType::Exact : MatchType::PartOfWord;
}

Vocabulary::Vocabulary() : Vocabulary({}, {}, 40) {}

Vocabulary::Vocabulary(std::vector<std::u32string> chars, std::vector<std::u32string> words,
                       int max_rel_dist)
    : max_rel_dist_(max_rel_dist) {
  if (max_rel_dist < 1) throw std::invalid_argument("max_rel_dist must be positive");
  auto init = [](std::vector<std::u32string>& table, std::map<std::u32string, int>& ids,
                 std::vector<std::u32string> tokens) {
    table = {U"<pad>", U"<unk>"};
    for (auto& tok : tokens) {
      if (ids.count(tok) || tok == U"<pad>" || tok == U"<unk>") continue;
      ids.emplace(tok, static_cast<int>(table.size()));
      table.push_back(std::move(tok));
    }
  };
  init(chars_, char_ids_, std::move(chars));
  init(words_, word_ids_, std::move(words));
}

int Vocabulary::char_id(char32_t c) const {
  auto it = char_ids_.find(std::u32string(1, c));
  return it == char_ids_.end() ? kUnk : it->second;
}

int Vocabulary::word_id(const std::u32string& word) const {
  auto it = word_ids_.find(word);
  return it == word_ids_.end() ? kUnk : it->second;
}

std::size_t Vocabulary::position_index(long relative) const {
  const long m = max_rel_dist_;
  return static_cast<std::size_t>(std::clamp(relative, -m, m) + m);
}

std::string Vocabulary::dump() const {
  std::string out = "max_rel_dist\t" + std::to_string(max_rel_dist_) + "\n";
  out += "chars\t" + std::to_string(chars_.size()) + "\n";
  for (std::size_t i = 0; i < chars_.size(); ++i) out += std::to_string(i) + "\t" + utf8::encode(chars_[i]) + "\n";
  out += "words\t" + std::to_string(words_.size()) + "\n";
  for (std::size_t i = 0; i < words_.size(); ++i) out += std::to_string(i) + "\t" + utf8::encode(words_[i]) + "\n";
  return out;
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t min_count, int max_rel_dist) {
  std::map<std::u32string, std::size_t> char_freq, word_freq;
  std::vector<std::u32string> char_order, word_order;
  for (const auto& s : corpus.sentences) {
    for (char32_t c : s.chars) {
      std::u32string key(1, c);
      if (char_freq[key]++ == 0) char_order.push_back(key);
    }
    for (std::size_t w = 0; w < s.word_spans.size(); ++w) {
      std::u32string key = s.word_text(w);
      if (word_freq[key]++ == 0) word_order.push_back(key);
    }
  }
  auto keep = [min_count](std::vector<std::u32string>& order, const auto& freq) {
    std::erase_if(order, [&](const std::u32string& t) { return freq.at(t) < min_count; });
  };
  keep(char_order, char_freq);
  keep(word_order, word_freq);
  return Vocabulary(std::move(char_order), std::move(word_order), max_rel_dist);
}

EncodedSentence encode_sentence(const AnnotatedSentence& s, const Vocabulary& vocab) {
  EncodedSentence e;
  e.chars.reserve(s.chars.size());
  for (char32_t c : s.chars) e.chars.push_back(vocab.char_id(c));
  e.char_to_word.resize(s.chars.size());
  for (std::size_t w = 0; w < s.word_spans.size(); ++w) {
    e.words.push_back(vocab.word_id(s.word_text(w)));
    for (std::size_t c = s.word_spans[w].start; c <= s.word_spans[w].end; ++c) e.char_to_word[c] = w;
  }
  return e;
}

InstanceSets make_instances(const Corpus& corpus, double neg_ratio, std::uint64_t seed,
                            int max_nugget_length) {
  if (!(neg_ratio >= 0.0)) throw std::invalid_argument("neg_ratio must be non-negative");
  InstanceSets sets;
  std::vector<std::pair<std::size_t, std::size_t>> pool;
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const AnnotatedSentence& s = corpus.sentences[si];
    std::vector<bool> covered(s.size(), false);
    for (const auto& t : s.triggers) {
      for (std::size_t c = t.start; c < t.end(); ++c) covered[c] = true;
      if (t.length > static_cast<std::size_t>(max_nugget_length)) {
        ++sets.dropped_long_triggers;
        continue;
      }
      for (std::size_t c = t.start; c < t.end(); ++c) {
        TrainingInstance inst{si, c, encode_label(label_for(t, c), max_nugget_length), t.subtype.id};
        sets.nugget.push_back(inst);
        sets.type.push_back(inst);
      }
    }
    for (std::size_t c = 0; c < s.size(); ++c)
      if (!covered[c]) pool.emplace_back(si, c);
  }
  sets.no_triggers = sets.type.empty();
  const double want = std::floor(neg_ratio * static_cast<double>(sets.type.size()));
  const std::size_t k = std::min(pool.size(), static_cast<std::size_t>(want));
  sets.negatives_requested = static_cast<std::size_t>(want);
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    sets.nugget.push_back({pool[i].first, pool[i].second, 0, std::nullopt});
  }
  return sets;
}

}  // namespace npn
