#ifndef NPN_CONFIG_HPP_
#define NPN_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "npn/synthetic.hpp"
#include "npn/system.hpp"
#include "npn/trainer.hpp"

namespace npn {

struct PathsConfig {
  std::string train = "data/train.jsonl";
  std::string dev = "data/dev.jsonl";
  std::string test = "data/test.jsonl";
  std::string char_embeddings;  // optional "token v1 .. vd" file
  std::string word_embeddings;
  std::string output_dir = "runs/default";
  std::string checkpoint;  // resume source for train, model for predict
};

struct GeneratorConfig {
  GenSpec spec;
  std::uint64_t seed = 20240101;
  std::size_t train_sentences = 2000;
  std::size_t dev_sentences = 200;
  std::size_t test_sentences = 500;
};

struct RunConfig {
  PathsConfig paths;
  ModelConfig model;
  TrainConfig training;
  GeneratorConfig generator;
};

// Strict JSON: unknown keys throw ConfigError naming the full path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_json(const RunConfig& config);

}  // namespace npn

#endif  // NPN_CONFIG_HPP_
