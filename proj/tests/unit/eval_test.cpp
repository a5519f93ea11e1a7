#include <cmath>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "dualseq/errors.hpp"
#include "dualseq/eval/bleu.hpp"
#include "dualseq/eval/experiment.hpp"
#include "dualseq/eval/predict.hpp"
#include "dualseq/eval/report.hpp"
#include "dualseq/model/trainer.hpp"
#include "support/bleu_oracle.hpp"

namespace dualseq::eval {
namespace {

using testing_support::brute_bleu;

Tokens random_tokens(Rng& rng, std::size_t vocab) {
  Tokens t(1 + rng.below(15));
  for (auto& w : t) w = "w" + std::to_string(rng.below(vocab));
  return t;
}

TEST(Bleu, IdentityIsOneAndEmptyIsZero) {
  const Tokens t{"a", "b", "c", "d", "e"};
  EXPECT_EQ(bleu_sentence(t, t), 1.0);
  EXPECT_EQ(bleu_sentence(Tokens{"x"}, Tokens{"x"}), 1.0);
  EXPECT_EQ(bleu_sentence(Tokens{}, t), 0.0);
  EXPECT_THROW(bleu_sentence(t, Tokens{}), ContractError);
}

TEST(Bleu, HandExample) {
  const Tokens cand{"the", "cat", "sat"}, ref{"the", "cat", "sat", "down"};
  // p = 3/3, 2/2, 1/1, smoothed 1/(0+1); BP = exp(1 - 4/3).
  EXPECT_NEAR(bleu_sentence(cand, ref), std::exp(1.0 - 4.0 / 3.0), 1e-12);
  EXPECT_NEAR(bleu_sentence(cand, ref), brute_bleu(cand, ref), 1e-9);
}

TEST(Bleu, ClippingCapsRepeatedWords) {
  const Tokens cand{"the", "the", "the", "the"}, ref{"the", "cat"};
  const auto s = bleu_stats(cand, ref);
  EXPECT_EQ(s.matches[0], 1u);
  EXPECT_EQ(s.totals[0], 4u);
}

TEST(Bleu, MatchesBruteForceOracle) {
  Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    const Tokens cand = random_tokens(rng, 20), ref = random_tokens(rng, 20);
    EXPECT_NEAR(bleu_sentence(cand, ref), brute_bleu(cand, ref), 1e-9);
    EXPECT_EQ(bleu_sentence(ref, ref), 1.0);
  }
}

TEST(Bleu, CorpusPoolsAndDiffersFromMean) {
  const Tokens t{"a", "b", "c", "d"};
  const std::vector<std::pair<Tokens, Tokens>> same{{t, t}, {{"x", "y", "z", "w", "v"}, {"x", "y", "z", "w", "v"}}};
  EXPECT_EQ(bleu_corpus(same), 1.0);

  const std::vector<std::pair<Tokens, Tokens>> single{{{"a", "b", "c", "q", "e"}, {"a", "b", "c", "d", "e"}}};
  EXPECT_NEAR(bleu_corpus(single), bleu_sentence(single[0].first, single[0].second), 1e-12);

  // One perfect long pair and one unigram-only short pair. Pooling weighs
  // n-gram counts; averaging weighs sentences.
  const std::vector<std::pair<Tokens, Tokens>> crafted{
      {{"a", "b", "c", "d", "e", "f", "g", "h"}, {"a", "b", "c", "d", "e", "f", "g", "h"}},
      {{"x", "q", "s"}, {"x", "r", "t"}}};
  const double pooled = std::exp((std::log(9.0 / 11) + std::log(7.0 / 9) + std::log(6.0 / 7) + std::log(5.0 / 5)) / 4);
  const double mean = (1.0 + brute_bleu(crafted[1].first, crafted[1].second)) / 2;
  EXPECT_NEAR(bleu_corpus(crafted), pooled, 1e-12);
  EXPECT_NEAR(bleu_sentence_mean(crafted), mean, 1e-12);
  EXPECT_GT(std::abs(pooled - mean), 0.1);
}

TEST(Bleu, ReversalLowersAndPoolingIgnoresOrder) {
  Rng rng(31);
  std::vector<std::pair<Tokens, Tokens>> pairs;
  for (int i = 0; i < 50; ++i) {
    Tokens t(2 + rng.below(10));
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = "d" + std::to_string(k);
    rng.shuffle(std::span(t));
    Tokens rev(t.rbegin(), t.rend());
    EXPECT_LT(bleu_sentence(rev, t), bleu_sentence(t, t));
    pairs.emplace_back(random_tokens(rng, 12), random_tokens(rng, 12));
  }
  const double pooled = bleu_corpus(pairs);
  for (int k = 0; k < 5; ++k) {
    rng.shuffle(std::span(pairs));
    EXPECT_EQ(bleu_corpus(pairs), pooled);
  }
}

TEST(Bleu, UnsmoothedZeroOrder) {
  BleuParams p;
  p.smoothing = false;
  EXPECT_EQ(bleu_sentence(Tokens{"a", "x", "b"}, Tokens{"a", "y", "b"}, p), 0.0);
  p.max_n = 0;
  EXPECT_THROW(p.validate(), ContractError);
}

ExperimentReport sample_report() {
  ExperimentReport r;
  r.kind = "table5";
  r.seed = 0xffffffffffffffffULL;
  r.dims = "hidden=64 layers=2 embed=64 vocab=812";
  r.corpus_id = "00ff";
  r.rows = {{kDualLc, 20, 0.1 + 0.2}, {kDualLcLs, 100, 1.0 / 3.0}, {kFinetune, 0, 0.0}};
  return r;
}

TEST(Report, KeyValueRoundTripIsLossless) {
  const auto r = sample_report();
  std::istringstream in(render_keyvalue(r));
  EXPECT_EQ(parse_keyvalue(in), r);
  EXPECT_EQ(r.bleu(kDualLcLs, 100), 1.0 / 3.0);
  EXPECT_THROW(r.bleu(kDualLcLs, 40), ContractError);
}

TEST(Report, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "dualseq_report_test.txt";
  write_report(path, sample_report());
  EXPECT_EQ(read_report(path), sample_report());
  std::filesystem::remove(path);
}

TEST(Report, TableColumnsAndEmptyError) {
  const std::string table = render_table(sample_report());
  const std::string header = table.substr(table.find('\n') + 1, table.find('\n', table.find('\n') + 1) - table.find('\n') - 1);
  const auto m = header.find("method"), d = header.find("data"), b = header.find("BLEU");
  ASSERT_NE(m, std::string::npos);
  EXPECT_LT(m, d);
  EXPECT_LT(d, b);
  EXPECT_NE(table.find("0.3333"), std::string::npos);
  ExperimentReport empty;
  EXPECT_THROW(render_table(empty), ContractError);
}

TEST(Report, MalformedLinesAreDataErrors) {
  std::istringstream in("method=x pct=abc bleu=0.1 seed=1\n");
  EXPECT_THROW(parse_keyvalue(in), DataError);
}

const nn::ModelDims kDims{8, 2, 6, 14};

std::vector<std::vector<TokenId>> inputs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<TokenId>> out(n);
  for (auto& s : out) {
    s.resize(1 + rng.below(6));
    for (auto& t : s) t = static_cast<TokenId>(4 + rng.below(10));
  }
  return out;
}

TEST(Predict, IndependentOfThreadsAndBatching) {
  const model::DualModel m(kDims, 5);
  const auto in = inputs(37, 1);
  const auto one = predict(m, model::Origin::Text, in, 6, 1, 64);
  EXPECT_EQ(one.size(), in.size());
  EXPECT_EQ(predict(m, model::Origin::Text, in, 6, 3, 5), one);
  EXPECT_EQ(predict(m, model::Origin::Text, in, 6, 2, 1), one);
  EXPECT_TRUE(predict(m, model::Origin::Text, std::span<const std::vector<TokenId>>{}, 6, 2).empty());
  EXPECT_EQ(make_reference_predictions(m, in, 6), one);
}

TEST(Predict, UntrainedFlag) {
  model::DualModel m(kDims, 5);
  EXPECT_TRUE(looks_untrained(m));
  m.stage = model::Stage::Phase1;
  EXPECT_FALSE(looks_untrained(m));
}

ExperimentCorpus tiny_corpus() {
  ExperimentCorpus c;
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"hi there", "hello"}, {"how are you", "fine thanks"}, {"what is your name", "i am bob"},
      {"where do you live", "in paris"}, {"do you like tea", "yes i do"}, {"good night", "sleep well"}};
  for (int rep = 0; rep < 3; ++rep) {
    for (const auto& [p, r] : pairs) {
      auto split = [](const std::string& s) {
        Tokens t;
        std::istringstream in(s);
        for (std::string w; in >> w;) t.push_back(w);
        return t;
      };
      c.train_enc.push_back(split(p));
      c.train_dec.push_back(split(r));
      Tokens noisy = split(p);
      noisy[0] = rep == 0 ? noisy[0] : "uh";
      c.train_asr.push_back(noisy);
    }
  }
  c.test_enc = c.train_enc;
  c.test_dec = c.train_dec;
  c.test_asr = c.train_asr;
  return c;
}

TEST(Experiment, RowSetsAndDeterminism) {
  const auto corpus = tiny_corpus();
  ExperimentConfig cfg;
  cfg.dims = kDims;
  cfg.train.batch_size = 6;
  cfg.phase1_steps = 3;
  cfg.finetune_steps = 2;
  cfg.phase2_steps = 2;
  cfg.threads = 2;

  const auto t4 = run_experiment(ExperimentKind::Table4, corpus, cfg);
  ASSERT_EQ(t4.rows.size(), 6u);
  const double pcts[] = {0, 20, 40, 60, 80, 100};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(t4.rows[i].method, kFinetune);
    EXPECT_EQ(t4.rows[i].pct, pcts[i]);
  }

  const auto t5 = run_experiment(ExperimentKind::Table5, corpus, cfg);
  ASSERT_EQ(t5.rows.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(t5.rows[i].method, i < 5 ? kDualLc : kDualLcLs);
  EXPECT_EQ(run_experiment(ExperimentKind::Table5, corpus, cfg), t5);

  const auto t3 = run_experiment(ExperimentKind::Table3, corpus, cfg);
  ASSERT_EQ(t3.rows.size(), 2u);
  EXPECT_EQ(t3.rows[0].method, kTextOnly);
  EXPECT_EQ(t3.rows[1].method, kAsrTrained);
  EXPECT_EQ(t3.rows[0].bleu, t4.rows[0].bleu);
  EXPECT_EQ(t3.corpus_id, corpus.id());

  EXPECT_THROW(parse_experiment_kind("table9"), ContractError);
}

}  // namespace
}  // namespace dualseq::eval
