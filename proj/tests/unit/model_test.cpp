#include <cmath>

#include <gtest/gtest.h>

#include "dualseq/autodiff/gradcheck.hpp"
#include "dualseq/data/vocab.hpp"
#include "dualseq/errors.hpp"
#include "dualseq/model/forward.hpp"
#include "dualseq/model/trainer.hpp"

namespace dualseq::model {
namespace {

using ad::Graph;
using ad::Tensor;
using data::DialogExample;
using data::kEos;

std::vector<TokenId> random_seq(std::size_t len, std::size_t vocab, Rng& rng) {
  std::vector<TokenId> s(len);
  for (auto& t : s) t = static_cast<TokenId>(data::kReservedTokens + rng.below(vocab - data::kReservedTokens));
  return s;
}

std::vector<DialogExample> toy_corpus(std::size_t n, std::size_t vocab, std::uint64_t seed, std::size_t max_len = 4) {
  Rng rng(seed);
  std::vector<DialogExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    DialogExample ex;
    ex.src = random_seq(1 + rng.below(max_len), vocab, rng);
    ex.tgt = random_seq(1 + rng.below(max_len - 1), vocab, rng);
    ex.tgt.push_back(kEos);
    ex.asr = ex.src;
    if (rng.bernoulli(0.5)) (*ex.asr)[0] = random_seq(1, vocab, rng)[0];
    out.push_back(std::move(ex));
  }
  return out;
}

void copy_encoder(DualModel& m) {
  for (std::size_t l = 0; l < m.enc_text.size(); ++l) {
    auto src = m.enc_text[l].parameters();
    auto dst = m.enc_asr[l].parameters();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
  }
}

const nn::ModelDims kTiny{6, 2, 5, 11};

TEST(DualModel, ShapesAndInitRanges) {
  DualModel m(kTiny, 3);
  EXPECT_EQ(m.embedding.value.shape(), (ad::Shape{11, 5}));
  ASSERT_EQ(m.enc_text.size(), 2u);
  ASSERT_EQ(m.enc_asr.size(), 2u);
  EXPECT_EQ(m.enc_text[0].input_dim, 5u);
  EXPECT_EQ(m.dec[0].input_dim, 5u + 6u);
  EXPECT_EQ(m.dec[1].input_dim, 6u);
  EXPECT_EQ(m.out_w.value.shape(), (ad::Shape{6, 11}));
  for (double x : m.embedding.value.data()) EXPECT_LE(std::abs(x), 0.5 / 5);
  for (const auto* p : m.parameters()) {
    for (double x : p->value.data()) {
      if (p->value.rank() == 1) EXPECT_EQ(x, 0.0) << p->name;
      else if (p != &m.embedding) EXPECT_LE(std::abs(x), 0.08) << p->name;
    }
  }
  EXPECT_NE(m.checksum(Group::EncText), m.checksum(Group::EncAsr));
}

TEST(DualModel, SameSeedSameWeights) {
  EXPECT_EQ(DualModel(kTiny, 5).checksum(), DualModel(kTiny, 5).checksum());
  EXPECT_NE(DualModel(kTiny, 5).checksum(), DualModel(kTiny, 6).checksum());
}

TEST(DualModel, CheckpointRoundTrip) {
  DualModel m(kTiny, 8);
  m.stage = Stage::Phase2;
  m.steps = 12;
  const DualModel back = DualModel::from_checkpoint(m.to_checkpoint(99));
  EXPECT_EQ(back.checksum(), m.checksum());
  EXPECT_EQ(back.stage, Stage::Phase2);
  EXPECT_EQ(back.steps, 12u);

  auto ckpt = m.to_checkpoint(99);
  ckpt.blobs.pop_back();
  EXPECT_THROW(DualModel::from_checkpoint(ckpt), DataError);
}

TEST(Encode, ZeroWeightEncoderGivesZeroSummary) {
  DualModel m(kTiny, 1);
  for (auto& layer : m.enc_text)
    for (auto* p : layer.parameters()) p->value.fill(0.0);
  Graph g;
  BoundModel bm(g, std::as_const(m));
  const std::vector<std::vector<TokenId>> batch{{4, 5, 6}, {7}};
  const Summary c = encode(bm, Origin::Text, batch);
  for (const auto& layer : c.layers) EXPECT_EQ(layer.value(), Tensor({2, 6}));
}

TEST(Encode, CopiedEncodersAgreeBitwise) {
  DualModel m(kTiny, 2);
  copy_encoder(m);
  Graph g;
  BoundModel bm(g, std::as_const(m));
  const std::vector<std::vector<TokenId>> batch{{4, 5, 6}, {9, 10}};
  const Summary a = encode(bm, Origin::Text, batch), b = encode(bm, Origin::Asr, batch);
  EXPECT_EQ(flatten(a).value(), flatten(b).value());
  EXPECT_EQ(coherence_loss(a, b).value().item(), 0.0);
}

TEST(Encode, SingleTokenIsOneStackedStep) {
  DualModel m(kTiny, 4);
  Graph g;
  BoundModel bm(g, std::as_const(m));
  const std::vector<std::vector<TokenId>> batch{{7}};
  const Summary c = encode(bm, Origin::Text, batch);
  const std::vector<ad::Var> zero{g.constant(Tensor({1, 6})), g.constant(Tensor({1, 6}))};
  const std::vector<TokenId> id{7};
  auto step = nn::stacked_forward(bm.enc_text, zero, nn::embed(bm.embed_text, id));
  EXPECT_EQ(c.layers[0].value(), step.hidden[0].value());
  EXPECT_EQ(c.top().value(), step.top.value());
}

TEST(Encode, PaddingDoesNotLeakIntoShorterRows) {
  DualModel m(kTiny, 4);
  const std::vector<std::vector<TokenId>> alone{{5, 6}}, mixed{{5, 6}, {7, 8, 9, 10}};
  Graph g;
  BoundModel bm(g, std::as_const(m));
  const Tensor a = flatten(encode(bm, Origin::Text, alone)).value();
  const Tensor b = flatten(encode(bm, Origin::Text, mixed)).value();
  for (std::size_t j = 0; j < a.cols(); ++j) EXPECT_EQ(a.at(0, j), b.at(0, j));
}

TEST(Encode, EmptyInputsAreContractErrors) {
  DualModel m(kTiny, 4);
  Graph g;
  BoundModel bm(g, std::as_const(m));
  const std::vector<std::vector<TokenId>> none, blank{{}};
  EXPECT_THROW(encode(bm, Origin::Text, none), ContractError);
  EXPECT_THROW(encode(bm, Origin::Text, blank), ContractError);
}

TEST(Gate, RoutesByPhase) {
  DualModel m(kTiny, 4);
  Graph g;
  BoundModel bm(g, std::as_const(m));
  const std::vector<std::vector<TokenId>> batch{{5}};
  const Summary c_o = encode(bm, Origin::Text, batch), c_a = encode(bm, Origin::Asr, batch);

  EXPECT_EQ(gate_mode(TrainPhase::phase1()), GateMode::Phase1);
  EXPECT_EQ(gate_mode(TrainPhase::phase2(LossMode::Combined)), GateMode::Phase2);
  EXPECT_EQ(&asr_gate(GateMode::Phase1, &c_o, nullptr), &c_o);
  EXPECT_EQ(&asr_gate(GateMode::Phase2, &c_o, &c_a), &c_a);
  EXPECT_EQ(&asr_gate(GateMode::AsrInference, nullptr, &c_a), &c_a);
  EXPECT_EQ(&asr_gate(GateMode::TextInference, &c_o, nullptr), &c_o);

  EXPECT_THROW(asr_gate(GateMode::Phase1, nullptr, &c_a), ContractError);
  EXPECT_THROW(asr_gate(GateMode::Phase2, nullptr, &c_a), ContractError);
  EXPECT_THROW(asr_gate(GateMode::Phase2, &c_o, nullptr), ContractError);
  EXPECT_THROW(asr_gate(GateMode::AsrInference, &c_o, nullptr), ContractError);
  EXPECT_THROW((TrainPhase{Phase::Phase2, std::nullopt}.validate()), ContractError);
  EXPECT_THROW((TrainPhase{Phase::Phase1, LossMode::Combined}.validate()), ContractError);
}

TEST(Coherence, MatchesScalarLoop) {
  Rng rng(6);
  Graph g;
  Summary a, b;
  std::vector<Tensor> ta, tb;
  for (int l = 0; l < 2; ++l) {
    Tensor x({2, 512}), y({2, 512});
    nn::init_uniform(x, -1, 1, rng);
    nn::init_uniform(y, -1, 1, rng);
    a.layers.push_back(g.constant(x));
    b.layers.push_back(g.constant(y));
    ta.push_back(x);
    tb.push_back(y);
  }
  double oracle = 0.0;
  for (int l = 0; l < 2; ++l)
    for (std::size_t i = 0; i < ta[l].size(); ++i) oracle += (ta[l][i] - tb[l][i]) * (ta[l][i] - tb[l][i]);
  EXPECT_NEAR(coherence_loss(a, b).value().item(), oracle / 2.0, 1e-10);

  Summary e1{{g.constant(Tensor::matrix({{1, 0, 0}}))}}, z{{g.constant(Tensor::matrix({{0, 0, 0}}))}};
  EXPECT_EQ(coherence_loss(e1, z).value().item(), 1.0);
}

TEST(Decoder, UniformOutputGivesLogV) {
  DualModel m({6, 2, 5, 5}, 1);
  m.out_w.value.fill(0.0);
  Graph g;
  BoundModel bm(g, std::as_const(m));
  const std::vector<std::vector<TokenId>> src{{4, 3}}, tgt{{4, 3, kEos}};
  const Summary c = encode(bm, Origin::Text, src);
  EXPECT_NEAR(decode_teacher_forced(bm, c, tgt).value().item(), std::log(5.0), 1e-14);
}

TEST(Decoder, TeacherForcingOnlyAffectsLaterSteps) {
  DualModel m(kTiny, 9);
  const std::vector<std::vector<TokenId>> src{{4, 5, 6}};
  const std::vector<std::vector<TokenId>> tgt{{4, 5, 6, 7, 8, kEos}};
  Graph g;
  BoundModel bm(g, std::as_const(m));
  const Summary c = encode(bm, Origin::Text, src);
  const Tensor base = decoder_logits(bm, c, tgt).value();
  for (std::size_t t = 0; t + 1 < tgt[0].size(); ++t) {
    auto corrupted = tgt;
    corrupted[0][t] = corrupted[0][t] == 9 ? 10 : 9;
    const Tensor probe = decoder_logits(bm, c, corrupted).value();
    for (std::size_t s = 0; s < tgt[0].size(); ++s) {
      bool same = true;
      for (std::size_t v = 0; v < base.cols(); ++v) same = same && base.at(s, v) == probe.at(s, v);
      // y_t is the input of step t + 1.
      EXPECT_EQ(same, s <= t) << "corrupted " << t << " step " << s;
    }
  }
}

TEST(Decoder, LogitRowsAreStepMajor) {
  DualModel m(kTiny, 9);
  const std::vector<std::vector<TokenId>> src{{4, 5}, {6}};
  const std::vector<std::vector<TokenId>> tgt{{4, kEos}, {7, 8, kEos}};
  Graph g;
  BoundModel bm(g, std::as_const(m));
  const Tensor both = decoder_logits(bm, encode(bm, Origin::Text, src), tgt).value();
  ASSERT_EQ(both.rows(), 6u);
  const std::vector<std::vector<TokenId>> src1{{6}}, tgt1{{7, 8, kEos}};
  const Tensor one = decoder_logits(bm, encode(bm, Origin::Text, src1), tgt1).value();
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t v = 0; v < one.cols(); ++v) EXPECT_EQ(both.at(t * 2 + 1, v), one.at(t, v));
}

TEST(Greedy, EosBiasGivesEmptyOutput) {
  DualModel m(kTiny, 1);
  m.out_b.value[kEos] = 100.0;
  const std::vector<std::vector<TokenId>> src{{4, 5}, {6}};
  const auto out = respond(m, Origin::Text, src, 10);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].empty());
  EXPECT_TRUE(out[1].empty());
}

TEST(Greedy, IdenticalSummariesIdenticalOutputsAndMaxLen) {
  DualModel m(kTiny, 3);
  copy_encoder(m);
  const std::vector<std::vector<TokenId>> src{{4, 5, 9}};
  const auto a = respond(m, Origin::Text, src, 7);
  EXPECT_EQ(a, respond(m, Origin::Asr, src, 7));
  EXPECT_LE(a[0].size(), 7u);
  EXPECT_THROW(respond(m, Origin::Text, src, 0), ContractError);
}

TEST(Greedy, TiesPickLowestId) {
  DualModel m(kTiny, 1);
  m.out_w.value.fill(0.0);
  m.out_b.value.fill(0.0);
  m.out_b.value[7] = 1.0;
  m.out_b.value[5] = 1.0;
  const std::vector<std::vector<TokenId>> src{{4}};
  const auto out = respond(m, Origin::Text, src, 3);
  EXPECT_EQ(out[0], (std::vector<TokenId>{5, 5, 5}));
}

// L = L_c + L_s with every parameter trainable, against central differences.
TEST(Gradient, FullDualLossMatchesFiniteDifferences) {
  const nn::ModelDims dims{3, 2, 3, 7};
  DualModel m(dims, 17);
  Rng rng(17);
  for (auto* p : m.parameters()) nn::init_uniform(p->value, -0.6, 0.6, rng);
  const std::vector<std::vector<TokenId>> src{{4, 5, 6}, {5}}, asr{{4, 6}, {6, 5, 4}};
  const std::vector<std::vector<TokenId>> tgt{{6, kEos}, {4, 5, kEos}};
  auto loss = [&](bool backward) {
    Graph g;
    BoundModel bm = backward ? BoundModel(g, m, Binding::all()) : BoundModel(g, std::as_const(m));
    const Summary c_o = encode(bm, Origin::Text, src), c_a = encode(bm, Origin::Asr, asr);
    auto l = ad::add(coherence_loss(c_o, c_a), decode_teacher_forced(bm, c_a, tgt));
    if (backward) g.backward(l);
    return l.value().item();
  };
  for (auto* p : m.parameters()) p->grad = Tensor(p->value.shape());
  loss(true);
  double worst = 0.0;
  for (auto* p : m.parameters()) {
    const Tensor num = ad::extrapolated_difference_grad([&] { return loss(false); }, *p, 1e-3);
    for (std::size_t i = 0; i < num.size(); ++i) worst = std::max(worst, ad::relative_error(p->grad[i], num[i], 1e-7));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Trainer, StageRequirements) {
  DualModel m(kTiny, 1);
  try {
    Trainer t(m, Objective::Phase2Combined, {});
    FAIL() << "phase 2 accepted an untrained model";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("run phase 1 first"), std::string::npos);
  }
  EXPECT_THROW(Trainer(m, Objective::FineTune, {}), ContractError);
  EXPECT_NO_THROW(Trainer(m, Objective::Phase1, {}));
  m.stage = Stage::Phase2;
  EXPECT_THROW(Trainer(m, Objective::FineTune, {}), ContractError);
}

TEST(Trainer, ZeroStepsLeaveModelUnchanged) {
  DualModel m(kTiny, 1);
  const auto before = m.checksum();
  Trainer t(m, Objective::Phase1, {0});
  EXPECT_TRUE(t.run(toy_corpus(8, 11, 1)).empty());
  EXPECT_EQ(m.checksum(), before);
}

TEST(Trainer, Phase2FreezesTextEncoderAndCombinedLossIsSum) {
  const auto corpus = toy_corpus(12, 11, 2);
  DualModel m(kTiny, 2);
  TrainConfig cfg{20, 4};
  Trainer(m, Objective::Phase1, cfg).run(corpus);
  const auto enc_text = m.checksum(Group::EncText);
  for (Objective o : {Objective::Phase2Coherence, Objective::Phase2Combined}) {
    DualModel p2 = m;
    const auto dec = p2.checksum(Group::Decoder);
    Trainer t(p2, o, cfg);
    for (const auto& r : t.run(corpus)) {
      ASSERT_TRUE(r.l_c.has_value());
      EXPECT_TRUE(std::isfinite(r.loss));
      if (o == Objective::Phase2Combined) {
        ASSERT_TRUE(r.l_s.has_value());
        EXPECT_EQ(r.loss, *r.l_c + *r.l_s);
      } else {
        EXPECT_FALSE(r.l_s.has_value());
        EXPECT_EQ(r.loss, *r.l_c);
      }
    }
    EXPECT_EQ(p2.checksum(Group::EncText), enc_text);
    EXPECT_NE(p2.checksum(Group::EncAsr), m.checksum(Group::EncAsr));
    if (o == Objective::Phase2Coherence) EXPECT_EQ(p2.checksum(Group::Decoder), dec);
    EXPECT_EQ(p2.checksum(Group::Embedding), m.checksum(Group::Embedding));
    EXPECT_EQ(p2.stage, Stage::Phase2);
  }
}

TEST(Trainer, AsrEncoderStartsFromTextEncoderOnPhase2Entry) {
  const auto corpus = toy_corpus(12, 11, 6);
  DualModel m(kTiny, 6);
  Trainer(m, Objective::Phase1, {10, 4}).run(corpus);

  DualModel copied = m;
  Trainer(copied, Objective::Phase2Combined, {0, 4});
  EXPECT_EQ(copied.checksum(Group::EncAsr), m.checksum(Group::EncText));
  // Equal encoders reading identical inputs start with L_c exactly zero.
  auto clean = corpus;
  for (auto& ex : clean) ex.asr = ex.src;
  DualModel one = m;
  EXPECT_EQ(*Trainer(one, Objective::Phase2Coherence, {1, 4}).run(clean).front().l_c, 0.0);

  DualModel kept = m;
  TrainConfig keep{0, 4};
  keep.asr_init = AsrInit::Keep;
  Trainer(kept, Objective::Phase2Combined, keep);
  EXPECT_EQ(kept.checksum(Group::EncAsr), m.checksum(Group::EncAsr));

  // A model already in phase 2 is left alone.
  DualModel again = copied;
  Trainer(again, Objective::Phase2Combined, {3, 4}).run(corpus);
  const auto trained = again.checksum(Group::EncAsr);
  Trainer(again, Objective::Phase2Combined, {0, 4});
  EXPECT_EQ(again.checksum(Group::EncAsr), trained);
  EXPECT_NE(trained, again.checksum(Group::EncText));

  EXPECT_EQ(parse_asr_init("keep"), AsrInit::Keep);
  EXPECT_THROW(parse_asr_init("zero"), ContractError);
}

TEST(Trainer, FineTuneChangesModelAndLowersLoss) {
  const auto corpus = toy_corpus(16, 11, 3);
  DualModel m(kTiny, 3);
  Trainer(m, Objective::Phase1, {5, 8}).run(corpus);
  DualModel ft = m;
  TrainConfig cfg{100, 8};
  cfg.adam.learning_rate = 0.01;
  const auto records = Trainer(ft, Objective::FineTune, cfg).run(corpus);
  EXPECT_NE(ft.checksum(), m.checksum());
  double early = 0.0, late = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    early += records[i].loss;
    late += records[records.size() - 1 - i].loss;
  }
  EXPECT_LT(late, early);
  EXPECT_EQ(ft.stage, Stage::FineTuned);
}

TEST(Trainer, ResumeContinuesBitwise) {
  const auto corpus = toy_corpus(20, 11, 4);
  DualModel straight(kTiny, 4);
  Trainer(straight, Objective::Phase1, {12, 4}).run(corpus);

  DualModel first(kTiny, 4);
  Trainer a(first, Objective::Phase1, {5, 4});
  a.run(corpus);
  const auto ckpt = a.checkpoint(0);
  DualModel second = DualModel::from_checkpoint(ckpt);
  Trainer b(second, Objective::Phase1, {7, 4});
  b.resume(ckpt);
  const auto records = b.run(corpus);
  EXPECT_EQ(records.front().step, 6u);
  EXPECT_EQ(records.back().step, 12u);
  EXPECT_EQ(second.checksum(), straight.checksum());
}

TEST(Trainer, StepRecordFormat) {
  StepRecord r{3, Objective::Phase2Coherence, std::nullopt, 0.5, 0.5, 1.25};
  EXPECT_EQ(r.to_string(), "step 3 phase 2 L_s - L_c 0.500000 L 0.500000 gnorm 1.250000");
}

TEST(Sampler, BatchesAreSameBucketAndIndexDetermined) {
  auto corpus = toy_corpus(50, 11, 5);
  for (std::size_t i = 0; i < corpus.size(); ++i) corpus[i].bucket = i % 3;
  BatchSampler s(corpus, 4, 9), t(corpus, 4, 9);
  for (std::uint64_t k = 0; k < 40; ++k) {
    const auto b = s.batch(k);
    ASSERT_FALSE(b.empty());
    EXPECT_LE(b.size(), 4u);
    for (auto i : b) EXPECT_EQ(corpus[i].bucket, corpus[b[0]].bucket);
    EXPECT_EQ(b, t.batch(k));
  }
  // One epoch visits every example once.
  std::vector<int> seen(corpus.size());
  for (std::uint64_t k = 0; k < s.batches_per_epoch(); ++k)
    for (auto i : s.batch(k)) ++seen[i];
  for (int c : seen) EXPECT_EQ(c, 1);
}

}  // namespace
}  // namespace dualseq::model
