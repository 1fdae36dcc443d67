#include "npn/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "npn/json_fields.hpp"

namespace npn {

void TrainConfig::validate() const {
  if (nugget_batch == 0) throw ConfigError("training.nugget_batch", "must be positive");
  if (type_batch == 0) throw ConfigError("training.type_batch", "must be positive");
  if (!(neg_ratio >= 0.0)) throw ConfigError("training.neg_ratio", "must be non-negative");
  if (!(adadelta.rho > 0.0 && adadelta.rho < 1.0)) throw ConfigError("training.rho", "must lie in (0, 1)");
  if (!(adadelta.eps > 0.0)) throw ConfigError("training.eps", "must be positive");
  if (patience == 0) throw ConfigError("training.patience", "must be positive");
}

nlohmann::json train_config_json(const TrainConfig& c) {
  nlohmann::json j = {
      {"seed", c.seed},           {"nugget_batch", c.nugget_batch}, {"type_batch", c.type_batch},
      {"epochs", c.epochs},       {"neg_ratio", c.neg_ratio},       {"rho", c.adadelta.rho},
      {"eps", c.adadelta.eps},    {"patience", c.patience},
  };
  j["stop_at_f1"] = c.stop_at_f1 ? nlohmann::json(*c.stop_at_f1) : nlohmann::json(nullptr);
  return j;
}

TrainConfig parse_train_config(const nlohmann::json& j, const std::string& where) {
  namespace jf = json_fields;
  jf::reject_unknown(j, where,
                     {"seed", "nugget_batch", "type_batch", "epochs", "neg_ratio", "rho", "eps", "patience",
                      "stop_at_f1"});
  TrainConfig c;
  jf::read(j, "seed", where, c.seed);
  jf::read(j, "nugget_batch", where, c.nugget_batch);
  jf::read(j, "type_batch", where, c.type_batch);
  jf::read(j, "epochs", where, c.epochs);
  jf::read(j, "neg_ratio", where, c.neg_ratio);
  jf::read(j, "rho", where, c.adadelta.rho);
  jf::read(j, "eps", where, c.adadelta.eps);
  jf::read(j, "patience", where, c.patience);
  double stop = -1.0;
  jf::read(j, "stop_at_f1", where, stop);
  if (stop >= 0.0) c.stop_at_f1 = stop;
  c.validate();
  return c;
}

nlohmann::json TrainState::to_json() const {
  return {{"next_epoch", next_epoch}, {"best_epoch", best_epoch}, {"best_f1", best_f1},
          {"stale_epochs", stale_epochs}, {"finished", finished}};
}

TrainState TrainState::from_json(const nlohmann::json& j) {
  TrainState s;
  s.next_epoch = j.at("next_epoch").get<std::size_t>();
  s.best_epoch = j.at("best_epoch").get<std::size_t>();
  s.best_f1 = j.at("best_f1").get<double>();
  s.stale_epochs = j.at("stale_epochs").get<std::size_t>();
  s.finished = j.at("finished").get<bool>();
  return s;
}

std::string format_epoch(const EpochRecord& r) {
  char buf[256];
  int n = std::snprintf(buf, sizeof(buf), "epoch %zu steps %zu loss %.6f", r.epoch, r.steps, r.loss);
  std::string out(buf, static_cast<std::size_t>(n));
  if (r.dev_id_f1 && r.dev_cls_f1) {
    n = std::snprintf(buf, sizeof(buf), " dev_id_f1 %.6f dev_cls_f1 %.6f", *r.dev_id_f1, *r.dev_cls_f1);
    out.append(buf, static_cast<std::size_t>(n));
  }
  if (r.improved) out += " best";
  return out;
}

std::vector<EpochRecord> train(System& system, const Corpus& train_corpus, const Corpus* dev,
                               const TrainConfig& config, TrainState& state, const TrainHooks& hooks) {
  config.validate();
  std::vector<EncodedSentence> encoded;
  encoded.reserve(train_corpus.sentences.size());
  for (const auto& s : train_corpus.sentences) encoded.push_back(system.encode(s));

  nd::GradBuffer grads(system.store());
  std::vector<EpochRecord> records;
  while (!state.finished && state.next_epoch <= config.epochs) {
    const std::size_t epoch = state.next_epoch;
    System::EpochData data = system.sample(train_corpus, config.neg_ratio, derive_seed(config.seed, 3 * epoch));
    Rng order(derive_seed(config.seed, 3 * epoch + 1));
    order.shuffle(data.primary);
    order.shuffle(data.secondary);
    Rng dropout(derive_seed(config.seed, 3 * epoch + 2));

    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t cursor = 0;
    for (std::size_t start = 0; start < data.primary.size(); start += config.nugget_batch) {
      const std::size_t stop = std::min(data.primary.size(), start + config.nugget_batch);
      std::vector<TrainingInstance> type_batch;
      if (!data.secondary.empty()) {
        for (std::size_t k = 0; k < config.type_batch; ++k) {
          type_batch.push_back(data.secondary[cursor]);
          cursor = (cursor + 1) % data.secondary.size();
        }
      }
      grads.zero();
      const double loss = system.batch_loss(
          encoded, std::span<const TrainingInstance>(data.primary).subspan(start, stop - start), type_batch,
          &grads, &dropout);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " step " +
                           std::to_string(rec.steps + 1));
      }
      system.store().accumulate(grads);
      nd::adadelta_step(system.store(), config.adadelta);
      rec.loss += loss;
      ++rec.steps;
    }

    if (dev) {
      const auto preds = system.predict(*dev);
      rec.dev_id_f1 = score(*dev, preds, ScoreMode::Identification).f1;
      rec.dev_cls_f1 = score(*dev, preds, ScoreMode::Classification).f1;
      rec.improved = *rec.dev_cls_f1 > state.best_f1;
    } else {
      rec.improved = true;
    }
    state.next_epoch = epoch + 1;
    if (rec.improved) {
      state.best_epoch = epoch;
      state.best_f1 = rec.dev_cls_f1.value_or(-1.0);
      state.stale_epochs = 0;
    } else {
      ++state.stale_epochs;
    }
    if (state.stale_epochs >= config.patience) state.finished = true;
    if (config.stop_at_f1 && rec.dev_cls_f1 && *rec.dev_cls_f1 >= *config.stop_at_f1) state.finished = true;
    if (state.next_epoch > config.epochs) state.finished = true;

    if (hooks.log) hooks.log(format_epoch(rec));
    if (rec.improved && hooks.on_best) hooks.on_best(system, state);
    if (hooks.on_epoch) hooks.on_epoch(system, state);
    records.push_back(rec);
  }
  return records;
}

}  // namespace npn
