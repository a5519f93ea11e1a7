#include "commands.hpp"

#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "dualseq/config/run_config.hpp"
#include "dualseq/data/corpus.hpp"
#include "dualseq/data/text.hpp"
#include "dualseq/data/vocab.hpp"
#include "dualseq/errors.hpp"
#include "dualseq/eval/bleu.hpp"
#include "dualseq/eval/experiment.hpp"
#include "dualseq/eval/predict.hpp"
#include "dualseq/eval/report.hpp"
#include "dualseq/eval/synthetic_corpus.hpp"
#include "dualseq/model/trainer.hpp"
#include "dualseq/nn/checkpoint.hpp"
#include "dualseq/noise/channel.hpp"

#ifndef DUALSEQ_DEFAULT_LEXICON
#define DUALSEQ_DEFAULT_LEXICON "homophones.tsv"
#endif

namespace dualseq::cli {

namespace fs = std::filesystem;

namespace {

config::RunConfig load_config(const Common& c) {
  config::RunConfig cfg = c.config.empty() ? config::RunConfig{} : config::RunConfig::load(c.config);
  if (c.seed) cfg.set("seed", std::to_string(*c.seed));
  if (cfg.noise.lexicon_path.empty()) cfg.noise.lexicon_path = DUALSEQ_DEFAULT_LEXICON;
  cfg.validate();
  return cfg;
}

void require_out(const Common& c, const char* what) {
  if (c.out.empty()) throw ContractError(fmt::format("--out {} is required", what));
  if (c.out.has_parent_path()) fs::create_directories(c.out.parent_path());
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw DataError(fmt::format("missing file {}", p.string()));
}

fs::path vocab_path(const fs::path& checkpoint) { return fs::path(checkpoint.string() + ".vocab"); }

struct Loaded {
  nn::Checkpoint ckpt;
  model::DualModel model;
  data::Vocab vocab;
};

Loaded load_model(const fs::path& path) {
  require_file(path);
  nn::Checkpoint ckpt = nn::load_checkpoint(path);
  data::Vocab vocab = data::Vocab::load(vocab_path(path));
  if (vocab.hash() != ckpt.vocab_hash) {
    throw DataError(fmt::format("{} does not match the vocabulary of {}", vocab_path(path).string(), path.string()));
  }
  model::DualModel m = model::DualModel::from_checkpoint(ckpt);
  return Loaded{std::move(ckpt), std::move(m), std::move(vocab)};
}

void save_model(const fs::path& path, const model::Trainer& trainer, const data::Vocab& vocab) {
  vocab.save(vocab_path(path));
  nn::save_checkpoint(path, trainer.checkpoint(vocab.hash()));
}

class StepLog {
 public:
  explicit StepLog(const fs::path& path) {
    if (!path.empty()) {
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      file_.open(path, std::ios::app);
      if (!file_) throw DataError(fmt::format("cannot open log {}", path.string()));
    }
  }
  void operator()(const model::StepRecord& r) {
    std::ostream& os = file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout;
    os << r.to_string() << '\n';
  }

 private:
  std::ofstream file_;
};

data::TokenLines corpus_file(const config::RunConfig& cfg, const char* name) {
  if (cfg.corpus_dir.empty()) throw ContractError("corpus_dir is not set in the config");
  const fs::path p = cfg.corpus_dir / name;
  require_file(p);
  return data::read_token_lines(p);
}

void report_load(const data::ParallelCorpus& corpus, const data::BucketSpec& spec) {
  std::cerr << corpus.summary.to_string(spec);
  if (corpus.examples.empty()) throw DataError("no example fits a bucket");
}

// Continues from --out when resuming, else starts from the phase-1 model.
Loaded initial_model(const Common& c, const TrainOptions& t, const config::RunConfig& cfg, const char* command) {
  if (t.resume && fs::exists(c.out)) return load_model(c.out);
  const fs::path init = t.init.empty() ? cfg.init_checkpoint : t.init;
  if (init.empty() || !fs::exists(init)) {
    throw ContractError(fmt::format("{}: no phase-1 checkpoint{}; run phase 1 first", command,
                                    init.empty() ? "" : " at " + init.string()));
  }
  return load_model(init);
}

std::vector<std::vector<ad::TokenId>> encode_lines(const data::Vocab& vocab, const std::vector<std::string>& lines) {
  std::vector<std::vector<ad::TokenId>> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(vocab.encode(data::tokenize(data::preprocess(l))));
  return out;
}

model::Origin parse_encoder(const std::string& encoder) {
  if (encoder == "text") return model::Origin::Text;
  if (encoder == "asr") return model::Origin::Asr;
  throw ContractError(fmt::format("unknown encoder '{}' (text or asr)", encoder));
}

}  // namespace

int cmd_preprocess(const fs::path& in, const Common& c) {
  require_out(c, "file");
  std::vector<std::string> lines = data::read_lines(in);
  for (auto& l : lines) l = data::preprocess(l);
  data::write_lines(c.out, lines);
  return 0;
}

int cmd_gen_corpus(const Common& c) {
  const auto cfg = load_config(c);
  if (c.out.empty()) throw ContractError("--out directory is required");
  const auto lexicon = noise::HomophoneLexicon::load(cfg.noise.lexicon_path);
  const auto stats = eval::write_synthetic_corpus(c.out, cfg.train_pairs, cfg.test_pairs, cfg.seed, cfg.noise, lexicon);
  std::cout << "train_asr.enc\n" << stats.train.to_string() << "test_asr.enc\n" << stats.test.to_string();
  return 0;
}

int cmd_synthesize(const fs::path& clean, const Common& c) {
  const auto cfg = load_config(c);
  require_out(c, "file");
  const auto lexicon = noise::HomophoneLexicon::load(cfg.noise.lexicon_path);
  const auto lines = data::read_token_lines(clean);
  const auto result = noise::synthesize_asr_corpus(lines, cfg.noise, lexicon);
  std::vector<std::string> out;
  out.reserve(result.noisy.size());
  for (const auto& t : result.noisy) out.push_back(data::join_tokens(t));
  data::write_lines(c.out, out);
  std::cout << result.report.to_string();
  return 0;
}

int cmd_train(const Common& c, const TrainOptions& t) {
  const auto cfg = load_config(c);
  require_out(c, "checkpoint");
  const auto enc = corpus_file(cfg, "train.enc");
  const auto dec = corpus_file(cfg, "train.dec");
  if (enc.size() != dec.size()) throw DataError(fmt::format("line count mismatch {} vs {}", enc.size(), dec.size()));

  std::optional<Loaded> resumed;
  if (t.resume && fs::exists(c.out)) resumed = load_model(c.out);
  data::Vocab vocab = resumed ? resumed->vocab : [&] {
    data::TokenLines all = enc;
    all.insert(all.end(), dec.begin(), dec.end());
    if (fs::exists(cfg.corpus_dir / "train_asr.enc")) {
      const auto asr = data::read_token_lines(cfg.corpus_dir / "train_asr.enc");
      all.insert(all.end(), asr.begin(), asr.end());
    }
    return data::Vocab::build(all, cfg.dims.vocab_size);
  }();
  nn::ModelDims dims = cfg.dims;
  dims.vocab_size = vocab.size();
  model::DualModel m = resumed ? std::move(resumed->model) : model::DualModel(dims, cfg.seed);

  const auto corpus = data::build_corpus(enc, dec, nullptr, vocab, cfg.buckets);
  report_load(corpus, cfg.buckets);
  model::Trainer trainer(m, model::Objective::Phase1, cfg.train_config(cfg.phase1_steps));
  if (resumed) trainer.resume(resumed->ckpt);
  StepLog log(t.log);
  trainer.run(corpus.examples, [&](const model::StepRecord& r) { log(r); });
  save_model(c.out, trainer, vocab);
  return 0;
}

int cmd_train_dual(const Common& c, const TrainOptions& t) {
  const auto cfg = load_config(c);
  require_out(c, "checkpoint");
  Loaded start = initial_model(c, t, cfg, "train-dual");
  const auto enc = corpus_file(cfg, "train.enc");
  const auto dec = corpus_file(cfg, "train.dec");
  const auto asr = corpus_file(cfg, "train_asr.enc");
  const auto corpus = data::build_corpus(enc, dec, &asr, start.vocab, cfg.buckets);
  report_load(corpus, cfg.buckets);
  const auto objective = cfg.loss_mode == model::LossMode::Combined ? model::Objective::Phase2Combined
                                                                     : model::Objective::Phase2Coherence;
  model::Trainer trainer(start.model, objective, cfg.train_config(cfg.phase2_steps));
  trainer.resume(start.ckpt);
  StepLog log(t.log);
  trainer.run(corpus.examples, [&](const model::StepRecord& r) { log(r); });
  save_model(c.out, trainer, start.vocab);
  return 0;
}

int cmd_finetune(const Common& c, const TrainOptions& t) {
  const auto cfg = load_config(c);
  require_out(c, "checkpoint");
  Loaded start = initial_model(c, t, cfg, "finetune");
  const auto asr = corpus_file(cfg, "train_asr.enc");
  const auto dec = corpus_file(cfg, "train.dec");
  const auto corpus = data::build_corpus(asr, dec, nullptr, start.vocab, cfg.buckets);
  report_load(corpus, cfg.buckets);
  const auto part = cfg.finetune_pct >= 100.0
                        ? corpus.examples
                        : data::subset_percentage<data::DialogExample>(corpus.examples, cfg.finetune_pct, cfg.seed);
  model::Trainer trainer(start.model, model::Objective::FineTune, cfg.train_config(cfg.finetune_steps));
  trainer.resume(start.ckpt);
  StepLog log(t.log);
  trainer.run(part, [&](const model::StepRecord& r) { log(r); });
  save_model(c.out, trainer, start.vocab);
  return 0;
}

int cmd_experiment(const std::string& kind, const Common& c) {
  const auto cfg = load_config(c);
  const auto k = eval::parse_experiment_kind(kind);
  if (cfg.corpus_dir.empty()) throw ContractError("corpus_dir is not set in the config");
  if (!c.out.empty() && c.out.has_parent_path()) fs::create_directories(c.out.parent_path());
  const auto corpus = eval::ExperimentCorpus::load(cfg.corpus_dir);
  const auto report = eval::run_experiment(k, corpus, cfg.experiment_config(),
                                           [](const std::string& msg) { std::cerr << msg << '\n'; });
  std::cout << eval::render_table(report);
  if (!c.out.empty()) eval::write_report(c.out, report);
  return 0;
}

int cmd_evaluate(const fs::path& checkpoint, const std::string& encoder, const fs::path& input,
                 const fs::path& reference, const Common& c) {
  const auto cfg = load_config(c);
  const auto origin = parse_encoder(encoder);
  require_out(c, "file");
  require_file(input);
  const Loaded loaded = load_model(checkpoint);
  if (eval::looks_untrained(loaded.model)) std::cerr << "warning: " << checkpoint.string() << " is untrained\n";
  const auto inputs = encode_lines(loaded.vocab, data::read_lines(input));
  const std::size_t threads = cfg.threads == 0 ? eval::eval_threads() : cfg.threads;
  const auto ids = eval::predict(loaded.model, origin, inputs, cfg.buckets.largest().dec_len, threads);
  std::vector<std::string> lines;
  std::vector<std::vector<std::string>> predicted;
  for (const auto& r : ids) {
    predicted.push_back(loaded.vocab.decode(r));
    lines.push_back(data::join_tokens(predicted.back()));
  }
  data::write_lines(c.out, lines);
  if (!reference.empty()) {
    const auto refs = data::read_token_lines(reference);
    if (refs.size() != predicted.size()) {
      throw DataError(fmt::format("line count mismatch {} vs {}", predicted.size(), refs.size()));
    }
    std::vector<std::pair<eval::Tokens, eval::Tokens>> pairs;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      if (!refs[i].empty()) pairs.emplace_back(predicted[i], refs[i]);
    }
    if (pairs.empty()) throw DataError("reference file has no non-empty line");
    std::cout << fmt::format("bleu={} pairs={}\n", eval::bleu_corpus(pairs), pairs.size());
  }
  return 0;
}

int cmd_chat(const fs::path& checkpoint, const std::string& encoder, std::istream& in, std::ostream& out,
             std::ostream& prompt) {
  const auto origin = parse_encoder(encoder);
  const Loaded loaded = load_model(checkpoint);
  const std::size_t max_len = data::BucketSpec{}.largest().dec_len;
  std::string line;
  for (;;) {
    prompt << "> " << std::flush;
    if (!std::getline(in, line)) break;
    const auto ids = loaded.vocab.encode(data::tokenize(data::preprocess(line)));
    if (ids.empty()) continue;
    const std::vector<std::vector<ad::TokenId>> batch{ids};
    const auto reply = model::respond(loaded.model, origin, batch, max_len);
    out << data::detokenize(loaded.vocab.decode(reply[0])) << '\n' << std::flush;
  }
  prompt << '\n';
  return 0;
}

}  // namespace dualseq::cli
