#ifndef NPN_TRAINER_HPP_
#define NPN_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "npn/eval.hpp"
#include "npn/system.hpp"

namespace npn {

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t nugget_batch = 32;  // S_G instances per step (the only set for baselines)
  std::size_t type_batch = 32;    // S_C instances per step
  std::size_t epochs = 100;
  double neg_ratio = 5.0;
  nd::AdadeltaConfig adadelta;
  std::size_t patience = 10;  // epochs without dev classification-F1 gain
  std::optional<double> stop_at_f1;  // stop once dev classification F1 reaches it

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

nlohmann::json train_config_json(const TrainConfig& config);
TrainConfig parse_train_config(const nlohmann::json& j, const std::string& where = "training");

// Progress carried across resumes in checkpoint metadata.
struct TrainState {
  std::size_t next_epoch = 1;
  std::size_t best_epoch = 0;
  double best_f1 = -1.0;
  std::size_t stale_epochs = 0;
  bool finished = false;

  nlohmann::json to_json() const;
  static TrainState from_json(const nlohmann::json& j);
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t steps = 0;
  double loss = 0.0;
  std::optional<double> dev_id_f1;
  std::optional<double> dev_cls_f1;
  bool improved = false;
};

struct TrainHooks {
  std::function<void(const std::string&)> log;
  // Called after an epoch that improves dev classification F1 (every epoch
  // without a dev set), and after every epoch for the rolling checkpoint.
  std::function<void(const System&, const TrainState&)> on_best;
  std::function<void(const System&, const TrainState&)> on_epoch;
};

std::string format_epoch(const EpochRecord& record);

// Epochs run over S_G: each step takes the next `nugget_batch` S_G instances and
// the next `type_batch` S_C instances, cycling through S_C. Negatives are
// resampled and both sets reshuffled every epoch from seeds derived from
// (seed, epoch). Throws NumericError when a batch loss is not finite.
std::vector<EpochRecord> train(System& system, const Corpus& train_corpus, const Corpus* dev,
                               const TrainConfig& config, TrainState& state, const TrainHooks& hooks = {});

}  // namespace npn

#endif  // NPN_TRAINER_HPP_
