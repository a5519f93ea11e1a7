#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dualseq/data/corpus.hpp"
#include "dualseq/eval/report.hpp"
#include "dualseq/model/trainer.hpp"
#include "dualseq/nn/dims.hpp"

namespace dualseq::eval {

/// The six line-aligned corpus files, tokenized.
struct ExperimentCorpus {
  data::TokenLines train_enc, train_dec, train_asr;
  data::TokenLines test_enc, test_dec, test_asr;

  /// Reads train.enc, train.dec, train_asr.enc, test.enc, test.dec and
  /// test_asr.enc from `dir`. Throws DataError for a missing file.
  static ExperimentCorpus load(const std::filesystem::path& dir);
  /// FNV-1a over every token of every file, as 16 hex digits.
  std::string id() const;
};

inline const std::vector<std::string>& corpus_file_names() {
  static const std::vector<std::string> kNames = {"train.enc", "train.dec", "train_asr.enc",
                                                  "test.enc",  "test.dec",  "test_asr.enc"};
  return kNames;
}

struct ExperimentConfig {
  nn::ModelDims dims;  // vocab_size is the vocabulary cap; the model uses the built size
  data::BucketSpec buckets;
  model::TrainConfig train;  // steps ignored; see the per-run counts below
  std::uint64_t phase1_steps = 2000;
  std::uint64_t finetune_steps = 1000;
  std::uint64_t phase2_steps = 1000;
  std::vector<double> pcts{20, 40, 60, 80, 100};
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: eval_threads()
};

enum class ExperimentKind { Table3, Table4, Table5, All, Compare };

ExperimentKind parse_experiment_kind(const std::string& name);
const char* experiment_kind_name(ExperimentKind kind);

using ProgressFn = std::function<void(const std::string&)>;

/// Trains the text model (phase 1 on train.enc -> train.dec), derives
/// test.pred from test.enc, then per kind:
///   table3  text_only (pct 0) and asr_trained (phase 1 on train_asr.enc, pct 100)
///   table4  finetune at pct 0 (the text model) and at every configured pct
///   table5  dual_Lc and dual_LcLs at every configured pct
///   compare text_only, then finetune and dual_LcLs at every configured pct
/// Every row scores greedy decodes of test_asr.enc (ASR encoder for dual
/// rows, text encoder otherwise) by pooled corpus BLEU against test.pred.
/// Only examples whose text and ASR variants share a bucket are used.
ExperimentReport run_experiment(ExperimentKind kind, const ExperimentCorpus& corpus, const ExperimentConfig& config,
                                const ProgressFn& progress = {});

}  // namespace dualseq::eval
