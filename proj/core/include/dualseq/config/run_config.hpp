#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "dualseq/data/corpus.hpp"
#include "dualseq/eval/experiment.hpp"
#include "dualseq/model/trainer.hpp"
#include "dualseq/nn/dims.hpp"
#include "dualseq/nn/optim.hpp"
#include "dualseq/noise/channel.hpp"

namespace dualseq::config {

/// Everything a command needs. Defaults are the full-scale settings
/// (512x2 GRUs, 64-dim embeddings, 35000 words, Adam 0.002/0.9/0.999/1e-8,
/// clip 5, batch 64, buckets 10:10,20:20).
struct RunConfig {
  nn::ModelDims dims;
  nn::AdamConfig adam;
  double clip_threshold = 5.0;
  std::size_t batch_size = 64;
  data::BucketSpec buckets;
  std::uint64_t seed = 1;

  std::uint64_t phase1_steps = 2000;
  std::uint64_t phase2_steps = 1000;
  std::uint64_t finetune_steps = 1000;
  model::LossMode loss_mode = model::LossMode::Combined;
  model::AsrInit asr_init = model::AsrInit::CopyText;
  double finetune_pct = 100.0;
  std::vector<double> pcts{20, 40, 60, 80, 100};

  noise::NoiseConfig noise;
  std::size_t train_pairs = 6000;  // gen-corpus
  std::size_t test_pairs = 600;

  std::filesystem::path corpus_dir;
  std::filesystem::path init_checkpoint;  // phase-1 model for train-dual / finetune
  std::size_t threads = 0;

  /// Applies one key=value setting; unknown keys and bad values throw
  /// DataError. Relative paths resolve against `base`.
  void set(const std::string& key, const std::string& value, const std::filesystem::path& base = {});

  /// Throws ContractError on out-of-range values.
  void validate() const;

  /// Lines `key = value`; blank lines and '#' comments are skipped. Errors
  /// name `origin` and the line number.
  static RunConfig parse(std::istream& in, const std::string& origin = "<config>",
                         const std::filesystem::path& base = {});
  /// Paths inside the file resolve against the file's directory.
  static RunConfig load(const std::filesystem::path& path);

  /// Every key with its current value, in a form parse() accepts.
  std::string to_string() const;

  model::TrainConfig train_config(std::uint64_t steps) const;
  eval::ExperimentConfig experiment_config() const;
};

const std::vector<std::string>& config_keys();

}  // namespace dualseq::config
