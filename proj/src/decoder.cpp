#include "npn/decoder.hpp"

#include <cmath>
#include <map>
#include <set>
#include <tuple>

namespace npn {

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

std::optional<Prediction> propose_at(std::size_t sentence_length, std::size_t char_index,
                                     const CharDistributions& dist, int max_nugget_length,
                                     const SubtypeInventory& subtypes, DecodeStats* stats) {
  if (stats) ++stats->characters;
  const std::size_t cls = argmax(dist.nugget);
  if (cls == 0) {
    if (stats) ++stats->nil;
    return std::nullopt;
  }
  const NuggetLabel label = decode_label(static_cast<int>(cls), max_nugget_length);
  const auto offset = static_cast<std::size_t>(label.position - 1);
  const auto length = static_cast<std::size_t>(label.length);
  if (offset > char_index || char_index - offset + length > sentence_length) {
    if (stats) ++stats->out_of_bounds;
    return std::nullopt;
  }
  const std::size_t type = argmax(dist.type);
  Prediction p;
  p.start = char_index - offset;
  p.length = length;
  p.subtype = {subtypes.name(static_cast<int>(type)), static_cast<int>(type)};
  p.score = std::log(dist.nugget[cls]) + std::log(dist.type[type]);
  if (stats) ++stats->proposals;
  return p;
}

std::vector<Prediction> decode_sentence(std::size_t sentence_length, const CharScorer& scorer,
                                        int max_nugget_length, const SubtypeInventory& subtypes,
                                        DecodeStats* stats) {
  std::map<std::pair<std::size_t, std::size_t>, Prediction> best;
  for (std::size_t i = 0; i < sentence_length; ++i) {
    auto p = propose_at(sentence_length, i, scorer(i), max_nugget_length, subtypes, stats);
    if (!p) continue;
    auto [it, inserted] = best.try_emplace({p->start, p->length}, *p);
    if (inserted) continue;
    Prediction& cur = it->second;
    if (p->score > cur.score || (p->score == cur.score && p->subtype.id < cur.subtype.id)) cur = *p;
  }
  std::vector<Prediction> out;
  for (auto& [span, p] : best) out.push_back(p);
  std::sort(out.begin(), out.end(), span_order);
  return out;
}

std::vector<Prediction> decode_oracle(std::size_t sentence_length, const CharScorer& scorer,
                                      int max_nugget_length, const SubtypeInventory& subtypes) {
  if (sentence_length > 12) throw std::invalid_argument("decode_oracle: sentence longer than 12");
  // true iff values[k] is the first maximum
  auto is_first_max = [](const nd::Vec& values, std::size_t k) {
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (j < k && values[j] >= values[k]) return false;
      if (j > k && values[j] > values[k]) return false;
    }
    return true;
  };
  using Candidate = std::tuple<std::size_t, std::size_t, int, double>;  // start, length, subtype, score
  std::set<Candidate> candidates;
  const auto classes = static_cast<std::size_t>(nugget_class_count(max_nugget_length));
  for (std::size_t i = 0; i < sentence_length; ++i) {
    const CharDistributions d = scorer(i);
    for (std::size_t k = 1; k < classes; ++k) {
      if (!is_first_max(d.nugget, k)) continue;
      const NuggetLabel label = decode_label(static_cast<int>(k), max_nugget_length);
      const long start = static_cast<long>(i) - (label.position - 1);
      const long end = start + label.length;
      if (start < 0 || end > static_cast<long>(sentence_length)) continue;
      for (std::size_t t = 0; t < d.type.size(); ++t) {
        if (!is_first_max(d.type, t)) continue;
        candidates.emplace(static_cast<std::size_t>(start), static_cast<std::size_t>(label.length),
                           static_cast<int>(t), std::log(d.nugget[k]) + std::log(d.type[t]));
      }
    }
  }
  std::vector<Prediction> out;
  for (const auto& c : candidates) {
    bool dominated = false;
    for (const auto& o : candidates) {
      if (std::get<0>(o) != std::get<0>(c) || std::get<1>(o) != std::get<1>(c)) continue;
      if (std::get<3>(o) > std::get<3>(c) ||
          (std::get<3>(o) == std::get<3>(c) && std::get<2>(o) < std::get<2>(c))) {
        dominated = true;
        break;
      }
    }
    if (dominated) continue;
    Prediction p;
    p.start = std::get<0>(c);
    p.length = std::get<1>(c);
    p.subtype = {subtypes.name(std::get<2>(c)), std::get<2>(c)};
    p.score = std::get<3>(c);
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(), span_order);
  return out;
}

CharScorer model_scorer(const NpnModel& model, const nd::ParamStore& store,
                        const EncodedSentence& sentence) {
  return [&model, &store, &sentence](std::size_t i) { return model.distributions(store, sentence, i); };
}

}  // namespace npn
