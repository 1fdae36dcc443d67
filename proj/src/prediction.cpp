#include "npn/prediction.hpp"

#include <fstream>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "npn/utf8.hpp"

namespace npn {

using nlohmann::json;

bool span_order(const Prediction& a, const Prediction& b) {
  return std::tie(a.start, a.length, a.subtype.id, a.subtype.name) <
         std::tie(b.start, b.length, b.subtype.id, b.subtype.name);
}

std::string serialize_predictions(const SentencePredictions& sp) {
  json j;
  j["doc_id"] = sp.doc_id;
  j["sent_id"] = sp.sent_id;
  j["text"] = utf8::encode(sp.text);
  json preds = json::array();
  for (const auto& p : sp.predictions) {
    preds.push_back({{"start", p.start}, {"length", p.length}, {"type", p.subtype.name}, {"score", p.score}});
  }
  j["predictions"] = std::move(preds);
  return j.dump();
}

std::vector<SentencePredictions> parse_predictions(std::string_view text) {
  std::vector<SentencePredictions> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      json j = json::parse(line);
      SentencePredictions sp;
      sp.doc_id = j.at("doc_id").get<std::string>();
      sp.sent_id = j.at("sent_id").get<std::string>();
      if (auto it = j.find("text"); it != j.end()) sp.text = utf8::decode(it->get<std::string>());
      for (const json& p : j.at("predictions")) {
        Prediction pred;
        pred.start = p.at("start").get<std::size_t>();
        pred.length = p.at("length").get<std::size_t>();
        pred.subtype.name = p.at("type").get<std::string>();
        pred.score = p.value("score", 0.0);
        if (pred.length == 0) throw ValidationError(line_no, "predictions", "zero-length prediction");
        sp.predictions.push_back(std::move(pred));
      }
      out.push_back(std::move(sp));
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("malformed prediction record: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, std::string("field 'text': ") + e.what());
    }
  }
  return out;
}

std::vector<SentencePredictions> load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open prediction file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_predictions(buf.str());
}

void save_predictions(const std::string& path, const std::vector<SentencePredictions>& all) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write prediction file '" + path + "'");
  for (const auto& sp : all) out << serialize_predictions(sp) << '\n';
}

}  // namespace npn
