// Command-line driver: gen-data, train, predict, eval, inspect, reference.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "npn/config.hpp"
#include "npn/decoder.hpp"
#include "npn/eval.hpp"
#include "npn/synthetic.hpp"
#include "npn/system.hpp"
#include "npn/trainer.hpp"
#include "npn/utf8.hpp"

namespace fs = std::filesystem;
using namespace npn;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

// ---- gen-data --------------------------------------------------------------

struct GenArgs {
  std::string config;
};

int cmd_gen_data(const GenArgs& a) {
  const RunConfig cfg = config_or_default(a.config);
  const GeneratorConfig& g = cfg.generator;
  struct Split {
    const char* name;
    std::size_t size;
    const std::string& path;
  };
  const Split splits[] = {{"train", g.train_sentences, cfg.paths.train},
                          {"dev", g.dev_sentences, cfg.paths.dev},
                          {"test", g.test_sentences, cfg.paths.test}};
  for (std::size_t k = 0; k < 3; ++k) {
    GenSpec spec = g.spec;
    spec.sentences = splits[k].size;
    spec.doc_prefix = g.spec.doc_prefix + "-" + splits[k].name;
    const Corpus corpus = generate_synthetic_corpus(spec, derive_seed(g.seed, k));
    const fs::path p(splits[k].path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    save_corpus(splits[k].path, corpus);
    std::cout << splits[k].name << ": " << corpus.sentences.size() << " sentences, " << corpus.trigger_count()
              << " triggers -> " << splits[k].path << "\n"
              << format_match_stats(corpus_match_stats(corpus));
  }
  return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string resume;
};

void load_embeddings(System& system, const PathsConfig& paths) {
  auto load = [&](const std::string& path, const std::vector<std::u32string>& tokens, nd::ParamId table) {
    if (path.empty()) return;
    const std::size_t n = load_pretrained_embeddings(path, tokens, system.store(), table);
    std::cout << "loaded " << n << " embeddings from " << path << "\n";
  };
  if (const NpnModel* m = system.npn()) {
    load(paths.char_embeddings, system.vocab().chars(), m->encoder().char_extractor().embeddings());
    if (auto* w = m->encoder().word_extractor()) load(paths.word_embeddings, system.vocab().words(), w->embeddings());
  } else if (const IobModel* m = system.iob()) {
    load(paths.char_embeddings, system.vocab().chars(), m->encoder().char_extractor().embeddings());
    if (auto* w = m->encoder().word_extractor()) load(paths.word_embeddings, system.vocab().words(), w->embeddings());
  } else if (const WordwiseModel* m = system.wordwise()) {
    load(paths.word_embeddings, system.vocab().words(), m->extractor().embeddings());
  }
}

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = config_or_default(a.config);
  if (!a.resume.empty()) cfg.paths.checkpoint = a.resume;
  const fs::path out(cfg.paths.output_dir);
  fs::create_directories(out);
  write_text(out / "config.json", run_config_json(cfg).dump(2) + "\n");

  const Corpus train_corpus = load_corpus(cfg.paths.train);
  std::optional<Corpus> dev;
  if (!cfg.paths.dev.empty()) dev = load_corpus(cfg.paths.dev, &train_corpus.subtypes);

  TrainState state;
  std::optional<System> system;
  std::ios::openmode log_mode = std::ios::binary;
  if (!cfg.paths.checkpoint.empty()) {
    const nd::Checkpoint ck = nd::load_checkpoint(cfg.paths.checkpoint);
    system.emplace(System::from_checkpoint(ck));
    if (!(system->config() == cfg.model)) {
      throw ConfigError("model", "resume checkpoint was trained with a different model section");
    }
    state = TrainState::from_json(nlohmann::json::parse(ck.metadata).at("training").at("state"));
    state.finished = false;
    log_mode |= std::ios::app;
  } else {
    system.emplace(System::for_corpus(cfg.model, train_corpus, derive_seed(cfg.training.seed, 0xC0FFEE)));
    load_embeddings(*system, cfg.paths);
    log_mode |= std::ios::trunc;
  }

  std::ofstream log(out / "train.log", log_mode);
  if (!log) throw std::runtime_error("cannot write " + (out / "train.log").string());
  auto save = [&](const System& s, const TrainState& st, const char* name) {
    nlohmann::json extra = {{"state", st.to_json()}};
    nd::save_checkpoint((out / name).string(), s.store(), s.metadata(extra));
  };
  if (cfg.paths.checkpoint.empty()) {
    log << "system " << to_string(cfg.model.system) << " hybrid " << to_string(cfg.model.encoder.mode)
        << " params " << system->store().scalar_count() << " train_sentences " << train_corpus.sentences.size()
        << "\n";
    save(*system, state, "best.ckpt");
    save(*system, state, "last.ckpt");
  }

  TrainHooks hooks;
  hooks.log = [&](const std::string& line) {
    log << line << "\n";
    log.flush();
    std::cout << line << "\n";
  };
  hooks.on_best = [&](const System& s, const TrainState& st) { save(s, st, "best.ckpt"); };
  hooks.on_epoch = [&](const System& s, const TrainState& st) { save(s, st, "last.ckpt"); };
  train(*system, train_corpus, dev ? &*dev : nullptr, cfg.training, state, hooks);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "best_epoch %zu best_dev_cls_f1 %.6f", state.best_epoch, state.best_f1);
  log << buf << "\n";
  std::cout << buf << "\n";
  return 0;
}

// ---- predict ---------------------------------------------------------------

struct PredictArgs {
  std::string config;
  std::string checkpoint;
  std::string input;
  std::string output;
};

void check_compatible(const System& system, const ModelConfig& expected) {
  const nlohmann::json have = model_config_json(system.config());
  const nlohmann::json want = model_config_json(expected);
  std::string diff;
  for (const auto& [key, value] : want.items()) {
    if (have.at(key) != value) diff += "  " + key + ": checkpoint " + have.at(key).dump() + ", config " + value.dump() + "\n";
  }
  if (diff.empty()) return;
  const System probe(expected, system.vocab(), system.subtypes(), 1);
  for (std::size_t i = 0; i < std::min(probe.store().size(), system.store().size()); ++i) {
    const auto& p = probe.store().at(i);
    const auto& q = system.store().at(i);
    if (p.name != q.name || p.shape != q.shape) {
      diff += "  first differing parameter: checkpoint '" + q.name + "' " + nd::shape_string(q.shape) +
              ", config '" + p.name + "' " + nd::shape_string(p.shape) + "\n";
      break;
    }
  }
  if (probe.store().size() != system.store().size()) {
    diff += "  parameter tensors: checkpoint " + std::to_string(system.store().size()) + ", config " +
            std::to_string(probe.store().size()) + "\n";
  }
  throw std::runtime_error("checkpoint does not match the configured model:\n" + diff);
}

int cmd_predict(const PredictArgs& a) {
  const System system = System::from_checkpoint(nd::load_checkpoint(a.checkpoint));
  if (!a.config.empty()) check_compatible(system, load_run_config(a.config).model);
  const Corpus corpus = load_corpus(a.input);
  const auto preds = system.predict(corpus);
  const fs::path p(a.output);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  save_predictions(a.output, preds);
  std::size_t n = 0;
  for (const auto& sp : preds) n += sp.predictions.size();
  std::cout << "wrote " << n << " predictions for " << preds.size() << " sentences -> " << a.output << "\n";
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string gold;
  std::string predictions;
  std::string report;
  bool by_match_type = false;
};

int cmd_eval(const EvalArgs& a) {
  const Corpus gold = load_corpus(a.gold);
  const auto preds = load_predictions(a.predictions);
  ScoreReport id = score(gold, preds, ScoreMode::Identification);
  const ScoreReport cls = score(gold, preds, ScoreMode::Classification);
  if (a.by_match_type) id.by_match_type = recall_by_match_type(gold, preds);
  std::string text = format_report(id) + format_report(cls);
  nlohmann::json j = {{"identification", report_json(id)}, {"classification", report_json(cls)}};
  if (a.by_match_type) {
    const MatchStats stats = corpus_match_stats(gold);
    text += format_match_stats(stats);
    j["match_stats"] = match_stats_json(stats);
  }
  std::cout << text;
  if (!a.report.empty()) {
    write_text(a.report + ".txt", text);
    write_text(a.report + ".json", j.dump(2) + "\n");
  }
  return 0;
}

// ---- inspect ---------------------------------------------------------------

struct InspectArgs {
  std::string checkpoint;
  std::string text;
  std::string spans;
};

std::vector<WordSpan> parse_spans(const std::string& spec) {
  std::vector<WordSpan> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        const std::size_t i = std::stoul(item);
        out.push_back({i, i});
      } else {
        out.push_back({std::stoul(item.substr(0, colon)), std::stoul(item.substr(colon + 1))});
      }
    } catch (const std::exception&) {
      throw ValidationError(0, "words", "bad span '" + item + "' (expected start:end)");
    }
  }
  return out;
}

int cmd_inspect(const InspectArgs& a) {
  const System system = System::from_checkpoint(nd::load_checkpoint(a.checkpoint));
  const NpnModel* model = system.npn();
  if (!model) throw std::runtime_error("inspect needs an npn checkpoint, got " + std::string(to_string(system.config().system)));
  AnnotatedSentence s;
  s.doc_id = "inspect";
  s.sent_id = "0";
  s.chars = utf8::decode(a.text);
  s.word_spans = a.spans.empty() ? std::vector<WordSpan>{} : parse_spans(a.spans);
  if (a.spans.empty()) {
    for (std::size_t i = 0; i < s.chars.size(); ++i) s.word_spans.push_back({i, i});
  }
  validate_sentence(s);
  const EncodedSentence e = system.encode(s);
  const int L = model->max_nugget_length();
  std::string out = "idx\tchar";
  for (std::size_t k = 0; k < model->nugget_classes(); ++k) {
    const NuggetLabel lab = decode_label(static_cast<int>(k), L);
    out += lab.is_nil() ? "\tNIL" : "\t(" + std::to_string(lab.length) + "," + std::to_string(lab.position) + ")";
  }
  out += "\tsum\targmax\tsubtype\tflag\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    const CharDistributions d = model->distributions(system.store(), e, i);
    double sum = 0.0;
    out += std::to_string(i) + "\t" + utf8::encode(s.chars[i]);
    char buf[64];
    for (double p : d.nugget) {
      std::snprintf(buf, sizeof(buf), "\t%.6f", p);
      out += buf;
      sum += p;
    }
    const std::size_t best = argmax(d.nugget);
    std::snprintf(buf, sizeof(buf), "\t%.6f\t%zu\t", sum, best);
    out += buf;
    out += system.subtypes().name(static_cast<int>(argmax(d.type)));
    out += best == 0 ? "\tNIL\n" : "\t\n";
  }
  std::cout << out;
  for (const auto& p : system.predict(s)) {
    std::cout << "nugget " << p.start << "+" << p.length << " "
              << utf8::encode(std::u32string_view(s.chars).substr(p.start, p.length)) << " " << p.subtype.name
              << "\n";
  }
  return 0;
}

std::string reference_page(CLI::App& app) {
  std::string out = "# npn command reference\n\nGenerated by `npn reference`.\n\n```\n" +
                    app.get_formatter()->make_help(&app, "npn", CLI::AppFormatMode::Normal) + "```\n";
  for (const CLI::App* sub : app.get_subcommands({})) {
    out += "\n## " + sub->get_name() + "\n\n```\n" + sub->help() + "```\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nugget proposal networks for character-level event detection"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate synthetic train/dev/test corpora");
  g->add_option("-c,--config", gen.config, "Run config (JSON); defaults when omitted");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model; writes config.json, train.log, best.ckpt, last.ckpt");
  t->add_option("-c,--config", tr.config, "Run config (JSON); defaults when omitted");
  t->add_option("--resume", tr.resume, "Continue from a checkpoint written by train");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Decode a corpus with a trained checkpoint");
  p->add_option("-k,--checkpoint", pr.checkpoint, "Checkpoint file")->required();
  p->add_option("-i,--input", pr.input, "Corpus file (JSONL)")->required();
  p->add_option("-o,--output", pr.output, "Prediction file (JSONL)")->required();
  p->add_option("-c,--config", pr.config, "Refuse the checkpoint unless it matches this config's model section");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score predictions against a gold corpus");
  e->add_option("-g,--gold", ev.gold, "Gold corpus (JSONL)")->required();
  e->add_option("-p,--predictions", ev.predictions, "Prediction file (JSONL)")->required();
  e->add_option("-r,--report", ev.report, "Write <report>.txt and <report>.json");
  e->add_flag("--by-match-type", ev.by_match_type, "Add recall per word-trigger match type");

  InspectArgs in;
  auto* i = app.add_subcommand("inspect", "Per-character nugget distributions for one sentence");
  i->add_option("-k,--checkpoint", in.checkpoint, "NPN checkpoint")->required();
  i->add_option("-t,--text", in.text, "Sentence text")->required();
  i->add_option("-w,--words", in.spans, "Word spans start:end (inclusive), comma separated; one word per character when omitted");

  std::string ref_out;
  auto* r = app.add_subcommand("reference", "Print the command reference page (markdown)");
  r->add_option("-o,--output", ref_out, "Write to this file instead of stdout");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) return cmd_gen_data(gen);
    if (*t) return cmd_train(tr);
    if (*p) return cmd_predict(pr);
    if (*e) return cmd_eval(ev);
    if (*i) return cmd_inspect(in);
    if (*r) {
      const std::string page = reference_page(app);
      if (ref_out.empty()) {
        std::cout << page;
      } else {
        write_text(ref_out, page);
      }
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
