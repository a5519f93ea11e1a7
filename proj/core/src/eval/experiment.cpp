#include "dualseq/eval/experiment.hpp"

#include <chrono>

#include <fmt/format.h>

#include "dualseq/errors.hpp"
#include "dualseq/eval/bleu.hpp"
#include "dualseq/eval/predict.hpp"

namespace dualseq::eval {

namespace {

using model::DualModel;
using model::Objective;
using model::Origin;

std::vector<data::DialogExample> asr_as_source(const std::vector<data::DialogExample>& examples) {
  std::vector<data::DialogExample> out = examples;
  for (auto& ex : out) {
    ex.src = *ex.asr;
    ex.asr.reset();
  }
  return out;
}

class Runner {
 public:
  Runner(const ExperimentCorpus& corpus, const ExperimentConfig& config, const ProgressFn& progress)
      : config_(config), progress_(progress) {
    config.buckets.validate();
    data::TokenLines all;
    for (const auto* lines : {&corpus.train_enc, &corpus.train_dec, &corpus.train_asr}) {
      all.insert(all.end(), lines->begin(), lines->end());
    }
    vocab_ = data::Vocab::build(all, config.dims.vocab_size);
    dims_ = config.dims;
    dims_.vocab_size = vocab_.size();
    train_ = data::build_corpus(corpus.train_enc, corpus.train_dec, &corpus.train_asr, vocab_, config.buckets).examples;
    test_ = data::build_corpus(corpus.test_enc, corpus.test_dec, &corpus.test_asr, vocab_, config.buckets).examples;
    if (train_.empty()) throw DataError("no training pair fits a bucket");
    if (test_.empty()) throw DataError("no test pair fits a bucket");
    train_asr_ = asr_as_source(train_);
    max_len_ = config.buckets.largest().dec_len;
    threads_ = config.threads == 0 ? eval_threads() : config.threads;
  }

  std::string dims_text() const {
    return fmt::format("hidden={} layers={} embed={} vocab={}", dims_.hidden_dim, dims_.num_layers, dims_.embed_dim,
                       dims_.vocab_size);
  }

  DualModel train(DualModel m, Objective objective, std::span<const data::DialogExample> examples,
                  std::uint64_t steps, const std::string& label) {
    model::TrainConfig tc = config_.train;
    tc.steps = steps;
    tc.seed = config_.seed;
    const auto start = std::chrono::steady_clock::now();
    model::Trainer trainer(m, objective, tc);
    trainer.run(examples);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    say(fmt::format("{}: {} steps on {} pairs in {:.1f}s", label, steps, examples.size(), secs));
    return m;
  }

  DualModel text_model() {
    return train(DualModel(dims_, config_.seed), Objective::Phase1, train_, config_.phase1_steps, "text model");
  }

  void set_reference(const DualModel& text) {
    std::vector<std::vector<TokenId>> src;
    for (const auto& ex : test_) src.push_back(ex.src);
    auto ids = predict(text, Origin::Text, src, max_len_, threads_);
    reference_.clear();
    for (const auto& r : ids) reference_.push_back(vocab_.decode(r));
  }

  double score(const DualModel& m, Origin encoder) const {
    std::vector<std::vector<TokenId>> asr;
    for (const auto& ex : test_) asr.push_back(*ex.asr);
    auto ids = predict(m, encoder, asr, max_len_, threads_);
    std::vector<std::pair<Tokens, Tokens>> pairs;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (reference_[i].empty()) continue;
      pairs.emplace_back(vocab_.decode(ids[i]), reference_[i]);
    }
    return pairs.empty() ? 0.0 : bleu_corpus(pairs);
  }

  std::vector<data::DialogExample> subset(const std::vector<data::DialogExample>& examples, double pct) const {
    return data::subset_percentage<data::DialogExample>(examples, pct, config_.seed);
  }

  void say(const std::string& msg) const {
    if (progress_) progress_(msg);
  }

  const ExperimentConfig& config_;
  const ProgressFn& progress_;
  data::Vocab vocab_ = data::Vocab::from_tokens(data::reserved_token_names());
  nn::ModelDims dims_;
  std::vector<data::DialogExample> train_, train_asr_, test_;
  std::vector<Tokens> reference_;
  std::size_t max_len_ = 0;
  std::size_t threads_ = 1;
};

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "table3") return ExperimentKind::Table3;
  if (name == "table4") return ExperimentKind::Table4;
  if (name == "table5") return ExperimentKind::Table5;
  if (name == "all") return ExperimentKind::All;
  if (name == "compare") return ExperimentKind::Compare;
  throw ContractError(fmt::format("unknown experiment '{}' (table3, table4, table5, all, compare)", name));
}

const char* experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Table3: return "table3";
    case ExperimentKind::Table4: return "table4";
    case ExperimentKind::Table5: return "table5";
    case ExperimentKind::All: return "all";
    case ExperimentKind::Compare: return "compare";
  }
  return "?";
}

ExperimentReport run_experiment(ExperimentKind kind, const ExperimentCorpus& corpus, const ExperimentConfig& config,
                                const ProgressFn& progress) {
  for (double p : config.pcts) {
    if (!(p > 0.0 && p <= 100.0)) throw ContractError(fmt::format("experiment pct {} outside (0, 100]", p));
  }
  Runner run(corpus, config, progress);
  ExperimentReport report;
  report.kind = experiment_kind_name(kind);
  report.seed = config.seed;
  report.dims = run.dims_text();
  report.corpus_id = corpus.id();

  const DualModel text = run.text_model();
  if (looks_untrained(text)) run.say("warning: text model is untrained; test.pred comes from initial weights");
  run.set_reference(text);
  const double text_only = run.score(text, Origin::Text);
  const bool all = kind == ExperimentKind::All;
  const bool compare = kind == ExperimentKind::Compare;

  if (kind == ExperimentKind::Table3 || all) {
    report.rows.push_back({kTextOnly, 0, text_only});
    DualModel asr = run.train(DualModel(run.dims_, config.seed), Objective::Phase1, run.train_asr_,
                              config.phase1_steps, "asr-trained model");
    report.rows.push_back({kAsrTrained, 100, run.score(asr, Origin::Text)});
  }
  if (compare) report.rows.push_back({kTextOnly, 0, text_only});
  if (kind == ExperimentKind::Table4 || all || compare) {
    if (!compare) report.rows.push_back({kFinetune, 0, text_only});
    for (double pct : config.pcts) {
      auto part = run.subset(run.train_asr_, pct);
      DualModel m = run.train(text, Objective::FineTune, part, config.finetune_steps, fmt::format("finetune {}%", pct));
      report.rows.push_back({kFinetune, pct, run.score(m, Origin::Text)});
    }
  }
  if (kind == ExperimentKind::Table5 || all || compare) {
    for (auto [method, objective] : {std::pair{kDualLc, Objective::Phase2Coherence},
                                     std::pair{kDualLcLs, Objective::Phase2Combined}}) {
      if (compare && objective == Objective::Phase2Coherence) continue;
      for (double pct : config.pcts) {
        auto part = run.subset(run.train_, pct);
        DualModel m = run.train(text, objective, part, config.phase2_steps, fmt::format("{} {}%", method, pct));
        report.rows.push_back({method, pct, run.score(m, Origin::Asr)});
      }
    }
  }
  return report;
}

ExperimentCorpus ExperimentCorpus::load(const std::filesystem::path& dir) {
  const auto& names = corpus_file_names();
  ExperimentCorpus c;
  data::TokenLines* slots[] = {&c.train_enc, &c.train_dec, &c.train_asr, &c.test_enc, &c.test_dec, &c.test_asr};
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto path = dir / names[i];
    if (!std::filesystem::exists(path)) throw DataError(fmt::format("missing corpus file {}", path.string()));
    *slots[i] = data::read_token_lines(path);
  }
  return c;
}

std::string ExperimentCorpus::id() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto* lines : {&train_enc, &train_dec, &train_asr, &test_enc, &test_dec, &test_asr}) {
    for (const auto& line : *lines) {
      for (const auto& tok : line) feed(tok);
      feed("\n");
    }
    feed("\f");
  }
  return fmt::format("{:016x}", h);
}

}  // namespace dualseq::eval
