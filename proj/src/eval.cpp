#include "npn/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <tuple>

namespace npn {

std::string_view to_string(ScoreMode mode) {
  return mode == ScoreMode::Identification ? "identification" : "classification";
}

double Counts::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
double Counts::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
double Counts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

namespace {

struct SentenceMatch {
  std::vector<bool> gold_matched;
  std::vector<bool> pred_matched;
};

SentenceMatch match_sentence(const AnnotatedSentence& gold, const std::vector<Prediction>& preds,
                             const SubtypeInventory& inventory, ScoreMode mode) {
  SentenceMatch m;
  m.gold_matched.assign(gold.triggers.size(), false);
  m.pred_matched.assign(preds.size(), false);
  auto sub_id = [&](const Prediction& p) {
    auto id = inventory.find(p.subtype.name);
    return id ? *id : std::numeric_limits<int>::max();
  };
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Prediction& x = preds[a];
    const Prediction& y = preds[b];
    return std::make_tuple(-x.score, x.start, x.length, sub_id(x), x.subtype.name) <
           std::make_tuple(-y.score, y.start, y.length, sub_id(y), y.subtype.name);
  });
  for (std::size_t pi : order) {
    const Prediction& p = preds[pi];
    for (std::size_t g = 0; g < gold.triggers.size(); ++g) {
      const TriggerNugget& t = gold.triggers[g];
      if (m.gold_matched[g] || t.start != p.start || t.length != p.length) continue;
      if (mode == ScoreMode::Classification && t.subtype.name != p.subtype.name) continue;
      m.gold_matched[g] = true;
      m.pred_matched[pi] = true;
      break;
    }
  }
  return m;
}

// Predictions grouped per gold sentence index.
std::vector<std::vector<Prediction>> align(const Corpus& gold,
                                           const std::vector<SentencePredictions>& predictions) {
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    index.emplace(std::make_pair(gold.sentences[i].doc_id, gold.sentences[i].sent_id), i);
  }
  std::vector<std::vector<Prediction>> out(gold.sentences.size());
  for (const auto& sp : predictions) {
    auto it = index.find({sp.doc_id, sp.sent_id});
    if (it == index.end()) {
      throw ValidationError(0, "sent_id", "prediction for unknown sentence (" + sp.doc_id + ", " + sp.sent_id + ")");
    }
    auto& dst = out[it->second];
    dst.insert(dst.end(), sp.predictions.begin(), sp.predictions.end());
  }
  return out;
}

}  // namespace

ScoreReport score(const Corpus& gold, const std::vector<SentencePredictions>& predictions, ScoreMode mode) {
  const auto aligned = align(gold, predictions);
  ScoreReport r;
  r.mode = mode;
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& sent = gold.sentences[i];
    const SentenceMatch m = match_sentence(sent, aligned[i], gold.subtypes, mode);
    for (std::size_t g = 0; g < m.gold_matched.size(); ++g) {
      if (!m.gold_matched[g]) {
        ++r.counts.fn;
        if (mode == ScoreMode::Classification) ++r.by_subtype[sent.triggers[g].subtype.name].fn;
      }
    }
    for (std::size_t p = 0; p < m.pred_matched.size(); ++p) {
      const std::string& name = aligned[i][p].subtype.name;
      if (m.pred_matched[p]) {
        ++r.counts.tp;
        if (mode == ScoreMode::Classification) ++r.by_subtype[name].tp;
      } else {
        ++r.counts.fp;
        if (mode == ScoreMode::Classification) ++r.by_subtype[name].fp;
      }
    }
  }
  r.precision = r.counts.precision();
  r.recall = r.counts.recall();
  r.f1 = r.counts.f1();
  return r;
}

MatchRecallTable recall_by_match_type(const Corpus& gold, const std::vector<SentencePredictions>& predictions) {
  const auto aligned = align(gold, predictions);
  MatchRecallTable table;
  for (MatchType t : kAllMatchTypes) table[t] = {};
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& sent = gold.sentences[i];
    const SentenceMatch m = match_sentence(sent, aligned[i], gold.subtypes, ScoreMode::Identification);
    for (std::size_t g = 0; g < sent.triggers.size(); ++g) {
      MatchRecall& cell = table[classify_match_type(sent, sent.triggers[g])];
      ++cell.gold;
      if (m.gold_matched[g]) ++cell.found;
    }
  }
  return table;
}

MatchStats corpus_match_stats(const Corpus& corpus) {
  MatchStats s;
  for (const auto& sent : corpus.sentences) {
    for (const auto& t : sent.triggers) {
      ++s.counts[static_cast<std::size_t>(classify_match_type(sent, t))];
      ++s.triggers;
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    s.shares[k] = s.triggers == 0 ? 0.0 : static_cast<double>(s.counts[k]) / static_cast<double>(s.triggers);
  }
  return s;
}

namespace {
std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}
}  // namespace

std::string format_report(const ScoreReport& r) {
  std::string out = "Trigger " + std::string(r.mode == ScoreMode::Identification ? "Identification" : "Classification") + "\n";
  out += "  tp " + std::to_string(r.counts.tp) + "  fp " + std::to_string(r.counts.fp) + "  fn " +
         std::to_string(r.counts.fn) + "\n";
  out += "  P " + fmt("%.4f", r.precision) + "  R " + fmt("%.4f", r.recall) + "  F1 " + fmt("%.4f", r.f1) + "\n";
  if (!r.by_subtype.empty()) {
    out += "  per subtype:\n";
    for (const auto& [name, c] : r.by_subtype) {
      out += "    " + name + "  P " + fmt("%.4f", c.precision()) + "  R " + fmt("%.4f", c.recall()) +
             "  F1 " + fmt("%.4f", c.f1()) + "\n";
    }
  }
  if (r.by_match_type) out += format_match_table(*r.by_match_type);
  return out;
}

std::string format_match_table(const MatchRecallTable& table) {
  std::string out = "Recall by word-trigger match\n";
  for (const auto& [type, cell] : table) {
    out += "  " + std::string(to_string(type)) + "  " + std::to_string(cell.found) + "/" +
           std::to_string(cell.gold) + "  " + fmt("%.4f", cell.recall()) + "\n";
  }
  return out;
}

std::string format_match_stats(const MatchStats& s) {
  std::string out = "Word-trigger match statistics (" + std::to_string(s.triggers) + " triggers)\n";
  for (std::size_t k = 0; k < 3; ++k) {
    out += "  " + std::string(to_string(kAllMatchTypes[k])) + "  " + std::to_string(s.counts[k]) + "  " +
           fmt("%.2f%%", 100.0 * s.shares[k]) + "\n";
  }
  return out;
}

nlohmann::json report_json(const ScoreReport& r) {
  nlohmann::json j;
  j["mode"] = std::string(to_string(r.mode));
  j["tp"] = r.counts.tp;
  j["fp"] = r.counts.fp;
  j["fn"] = r.counts.fn;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  if (!r.by_subtype.empty()) {
    nlohmann::json subs = nlohmann::json::object();
    for (const auto& [name, c] : r.by_subtype) {
      subs[name] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"precision", c.precision()},
                    {"recall", c.recall()}, {"f1", c.f1()}};
    }
    j["by_subtype"] = std::move(subs);
  }
  if (r.by_match_type) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [type, cell] : *r.by_match_type) {
      m[std::string(to_string(type))] = {{"gold", cell.gold}, {"found", cell.found}, {"recall", cell.recall()}};
    }
    j["recall_by_match_type"] = std::move(m);
  }
  return j;
}

nlohmann::json match_stats_json(const MatchStats& s) {
  nlohmann::json j;
  j["triggers"] = s.triggers;
  for (std::size_t k = 0; k < 3; ++k) {
    j[std::string(to_string(kAllMatchTypes[k]))] = {{"count", s.counts[k]}, {"share", s.shares[k]}};
  }
  return j;
}

}  // namespace npn
