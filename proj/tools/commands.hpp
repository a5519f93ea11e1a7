#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace dualseq::cli {

struct Common {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
};

struct TrainOptions {
  std::filesystem::path init;
  std::filesystem::path log;
  bool resume = false;
};

int cmd_preprocess(const std::filesystem::path& in, const Common& c);
int cmd_gen_corpus(const Common& c);
int cmd_synthesize(const std::filesystem::path& clean, const Common& c);
int cmd_train(const Common& c, const TrainOptions& t);
int cmd_train_dual(const Common& c, const TrainOptions& t);
int cmd_finetune(const Common& c, const TrainOptions& t);
int cmd_experiment(const std::string& kind, const Common& c);
int cmd_evaluate(const std::filesystem::path& checkpoint, const std::string& encoder,
                 const std::filesystem::path& input, const std::filesystem::path& reference, const Common& c);
int cmd_chat(const std::filesystem::path& checkpoint, const std::string& encoder, std::istream& in, std::ostream& out,
             std::ostream& prompt);

}  // namespace dualseq::cli
