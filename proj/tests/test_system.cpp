#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "npn/config.hpp"
#include "npn/synthetic.hpp"
#include "npn/system.hpp"
#include "npn/trainer.hpp"
#include "toy.hpp"

using namespace npn;

namespace {

std::string file_bytes(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

ModelConfig small_model(SystemKind kind = SystemKind::Npn) {
  ModelConfig m;
  m.system = kind;
  m.encoder = toy::small_encoder(HybridMode::TaskSpecific);
  m.min_count = 1;
  return m;
}

}  // namespace

TEST_CASE("run config defaults and strictness") {
  const RunConfig d = parse_run_config(nlohmann::json::object());
  CHECK(d.model.encoder.extractor.filters == 200);
  CHECK(d.model.encoder.mode == HybridMode::TaskSpecific);
  CHECK(d.model.max_nugget_length == 3);
  CHECK(d.training.nugget_batch == 32);
  CHECK(d.training.type_batch == 32);
  CHECK(d.training.neg_ratio == 5.0);
  CHECK(d.training.patience == 10);
  CHECK(d.training.adadelta.rho == 0.95);
  CHECK(d.training.adadelta.eps == 1e-6);
  CHECK(d.generator.train_sentences == 2000);

  auto field_of = [](const std::string& text) {
    try {
      parse_run_config(nlohmann::json::parse(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"modle":{}})") == "config.modle");
  CHECK(field_of(R"({"model":{"filterz":3}})") == "model.filterz");
  CHECK(field_of(R"({"model":{"hybrid":"sum"}})") == "model.hybrid");
  CHECK(field_of(R"({"model":{"filters":-1}})") == "model.filters");
  CHECK(field_of(R"({"training":{"epochs":"ten"}})") == "training.epochs");
  CHECK(field_of(R"({"generator":{"proportions":[0.5,0.3,0.1]}})") == "generator.proportions");
  CHECK(field_of(R"({"generator":{"families":{"singel":1}}})") == "generator.families.singel");

  const nlohmann::json echoed = run_config_json(d);
  const RunConfig back = parse_run_config(echoed);
  CHECK(run_config_json(back) == echoed);
  CHECK(back.model == d.model);
  CHECK(back.training == d.training);
}

TEST_CASE("system metadata round trip through a checkpoint") {
  const Corpus c = toy::corpus();
  for (SystemKind kind : {SystemKind::Npn, SystemKind::Iob, SystemKind::Wordwise}) {
    System s = System::for_corpus(small_model(kind), c, 4);
    const auto path = (std::filesystem::temp_directory_path() / "npn_sys.ckpt").string();
    nd::save_checkpoint(path, s.store(), s.metadata());
    const System t = System::from_checkpoint(nd::load_checkpoint(path));
    CHECK(t.config() == s.config());
    CHECK(t.vocab().dump() == s.vocab().dump());
    CHECK(t.subtypes() == s.subtypes());
    for (const auto& sent : c.sentences) CHECK(t.predict(sent) == s.predict(sent));
    std::filesystem::remove(path);
  }
}

TEST_CASE("restoring into a different architecture fails with both shapes") {
  const Corpus c = toy::corpus();
  System a = System::for_corpus(small_model(), c, 1);
  ModelConfig other = small_model();
  other.encoder.extractor.proj_dim = 6;
  System b = System::for_corpus(other, c, 1);
  const auto path = (std::filesystem::temp_directory_path() / "npn_mismatch.ckpt").string();
  nd::save_checkpoint(path, a.store(), a.metadata());
  try {
    nd::restore(b.store(), nd::load_checkpoint(path));
    FAIL("expected a mismatch");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[4x") != std::string::npos);
    CHECK(msg.find("[6x") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("zero epochs keep the initial parameters") {
  const Corpus c = toy::corpus();
  System s = System::for_corpus(small_model(), c, 2);
  const auto before = s.store().params();
  TrainConfig tc;
  tc.epochs = 0;
  TrainState st;
  CHECK(train(s, c, &c, tc, st).empty());
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(s.store().at(i).value == before[i].value);
}

TEST_CASE("training is deterministic and resumes without a seam") {
  GenSpec spec;
  spec.sentences = 30;
  const Corpus c = generate_synthetic_corpus(spec, 8);
  TrainConfig tc;
  tc.epochs = 4;
  tc.neg_ratio = 2.0;
  tc.patience = 100;

  auto run = [&](std::size_t stop_after, std::string* log) {
    System s = System::for_corpus(small_model(), c, 6);
    TrainState st;
    TrainHooks hooks;
    hooks.log = [log](const std::string& line) { *log += line + "\n"; };
    TrainConfig first = tc;
    first.epochs = stop_after;
    train(s, c, &c, first, st, hooks);
    if (stop_after < tc.epochs) {
      const auto path = (std::filesystem::temp_directory_path() / "npn_resume.ckpt").string();
      nd::save_checkpoint(path, s.store(), s.metadata({{"state", st.to_json()}}));
      const nd::Checkpoint ck = nd::load_checkpoint(path);
      System r = System::from_checkpoint(ck);
      TrainState rs = TrainState::from_json(nlohmann::json::parse(ck.metadata).at("training").at("state"));
      rs.finished = false;
      train(r, c, &c, tc, rs, hooks);
      std::filesystem::remove(path);
      return r.store().params();
    }
    return s.store().params();
  };
  std::string log_a, log_b, log_c;
  const auto a = run(4, &log_a);
  const auto b = run(4, &log_b);
  const auto r = run(2, &log_c);
  CHECK(log_a == log_b);
  CHECK(log_a == log_c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].value == b[i].value);
    CHECK(a[i].value == r[i].value);
    CHECK(a[i].mean_sq_delta == r[i].mean_sq_delta);
  }
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  const Corpus c = toy::corpus();
  System s = System::for_corpus(small_model(), c, 2);
  s.store().at(s.store().id_of("head.nugget.b")).value[0] = std::numeric_limits<double>::infinity();
  TrainConfig tc;
  tc.epochs = 1;
  TrainState st;
  CHECK_THROWS_AS(train(s, c, nullptr, tc, st), NumericError);
}
