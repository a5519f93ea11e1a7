#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "dualseq/errors.hpp"

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

void add_common(CLI::App* cmd, dualseq::cli::Common& c, bool needs_config, bool needs_out = true) {
  auto* config = cmd->add_option("--config", c.config, "key = value run configuration")->check(CLI::ExistingFile);
  if (needs_config) config->required();
  cmd->add_option("--seed", c.seed, "overrides the config seed");
  auto* out = cmd->add_option("--out", c.out, "output path");
  if (needs_out) out->required();
}

void add_train(CLI::App* cmd, dualseq::cli::TrainOptions& t) {
  cmd->add_option("--init", t.init, "phase-1 checkpoint to start from");
  cmd->add_option("--log", t.log, "append step records here instead of stdout");
  cmd->add_flag("--resume", t.resume, "continue from --out if it exists");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace dualseq::cli;
  CLI::App app{"Dual-encoder dialog model: training, noise synthesis and evaluation"};
  app.require_subcommand(1);

  Common c;
  TrainOptions t;
  std::filesystem::path in, checkpoint, reference;
  std::string encoder = "text", kind;
  std::function<int()> run;

  auto* pre = app.add_subcommand("preprocess", "normalize a raw text file line by line");
  pre->add_option("input", in)->required()->check(CLI::ExistingFile);
  add_common(pre, c, false);
  pre->callback([&] { run = [&] { return cmd_preprocess(in, c); }; });

  auto* gen = app.add_subcommand("gen-corpus", "write a synthetic six-file dialog corpus to --out");
  add_common(gen, c, false);
  gen->callback([&] { run = [&] { return cmd_gen_corpus(c); }; });

  auto* syn = app.add_subcommand("synthesize", "simulate ASR output for a clean corpus");
  syn->add_option("clean", in)->required()->check(CLI::ExistingFile);
  add_common(syn, c, false);
  syn->callback([&] { run = [&] { return cmd_synthesize(in, c); }; });

  auto* train = app.add_subcommand("train", "phase 1: text encoder and decoder");
  add_common(train, c, true);
  add_train(train, t);
  train->callback([&] { run = [&] { return cmd_train(c, t); }; });

  auto* dual = app.add_subcommand("train-dual", "phase 2: ASR encoder against the frozen text encoder");
  add_common(dual, c, true);
  add_train(dual, t);
  dual->callback([&] { run = [&] { return cmd_train_dual(c, t); }; });

  auto* ft = app.add_subcommand("finetune", "continue the text model on ASR transcripts");
  add_common(ft, c, true);
  add_train(ft, t);
  ft->callback([&] { run = [&] { return cmd_finetune(c, t); }; });

  auto* exp = app.add_subcommand("experiment", "run table3, table4, table5, all or compare");
  exp->add_option("kind", kind)->required()->check(CLI::IsMember({"table3", "table4", "table5", "all", "compare"}));
  add_common(exp, c, true, false);
  exp->callback([&] { run = [&] { return cmd_experiment(kind, c); }; });

  auto* ev = app.add_subcommand("evaluate", "decode a file of inputs, optionally scoring BLEU");
  ev->add_option("checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  ev->add_option("input", in)->required()->check(CLI::ExistingFile);
  ev->add_option("--encoder", encoder)->check(CLI::IsMember({"text", "asr"}));
  ev->add_option("--reference", reference)->check(CLI::ExistingFile);
  add_common(ev, c, false);
  ev->callback([&] { run = [&] { return cmd_evaluate(checkpoint, encoder, in, reference, c); }; });

  auto* chat = app.add_subcommand("chat", "interactive replies, one per input line");
  chat->add_option("checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  chat->add_option("--encoder", encoder)->check(CLI::IsMember({"text", "asr"}));
  chat->callback([&] { run = [&] { return cmd_chat(checkpoint, encoder, std::cin, std::cout, std::cerr); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    return run();
  } catch (const dualseq::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
}
