#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "dualseq/data/corpus.hpp"
#include "dualseq/data/synthetic.hpp"
#include "dualseq/data/text.hpp"
#include "dualseq/data/vocab.hpp"
#include "dualseq/errors.hpp"

namespace dualseq::data {
namespace {

namespace fs = std::filesystem;

using Toks = std::vector<std::string>;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("dualseq_data_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
  fs::path dir;
};

TEST(Preprocess, Examples) {
  EXPECT_EQ(preprocess("I'm 25 years old!"), "i'm 00 years old!");
  EXPECT_EQ(preprocess("<u>Hello</u> there"), "hello there");
  EXPECT_EQ(preprocess(""), "");
  EXPECT_EQ(preprocess("call 911"), "call 000");
  EXPECT_EQ(preprocess("  A \t  b  "), "a b");
}

TEST(Preprocess, Idempotent) {
  for (const char* s : {"Hey, NICE to see you 2 again.", "<b>x</b>  <i>Y</i>", "3 < 4 > 2", "caf\xc3\xa9 OK"}) {
    const auto once = preprocess(s);
    EXPECT_EQ(preprocess(once), once) << s;
  }
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("how old are you?"), (Toks{"how", "old", "are", "you", "?"}));
  EXPECT_EQ(tokenize("hey, nice to see you again."), (Toks{"hey", ",", "nice", "to", "see", "you", "again", "."}));
  EXPECT_EQ(tokenize(""), Toks{});
  EXPECT_EQ(tokenize("what's up?!"), (Toks{"what's", "up", "?", "!"}));
  EXPECT_EQ(tokenize("\"quoted\""), (Toks{"\"", "quoted", "\""}));
}

TEST(Tokenize, JoinRoundTripsAndDetokenizeAttaches) {
  const Toks t = tokenize("hey, nice to see you again.");
  EXPECT_EQ(tokenize(join_tokens(t)), t);
  EXPECT_EQ(detokenize(t), "hey, nice to see you again.");
}

TEST(Vocab, FrequencyOrder) {
  const std::vector<Toks> lines{{"a", "a", "b"}};
  const Vocab v = Vocab::build(lines, 6);
  EXPECT_EQ(v.id_of("a"), 4);
  EXPECT_EQ(v.id_of("b"), 5);
  EXPECT_EQ(v.size(), 6u);
  // The size limit counts the four reserved ids.
  const Vocab small = Vocab::build(lines, 5);
  EXPECT_EQ(small.size(), 5u);
  EXPECT_EQ(small.id_of("a"), 4);
  EXPECT_EQ(small.id_of("b"), kUnk);
}

TEST(Vocab, ReservedOnly) {
  const std::vector<Toks> lines{{"x", "y"}};
  const Vocab v = Vocab::build(lines, 4);
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.encode(lines[0]), (std::vector<TokenId>{kUnk, kUnk}));
  EXPECT_THROW(Vocab::build(lines, 3), ContractError);
  EXPECT_THROW(Vocab::build(std::vector<Toks>{}, 10), ContractError);
}

TEST(Vocab, TiesAreLexicographicAndBuildIsDeterministic) {
  const std::vector<Toks> lines{{"z", "y", "x", "y"}, {"w", "z"}};
  const Vocab a = Vocab::build(lines, 100), b = Vocab::build(lines, 100);
  EXPECT_EQ(std::vector<std::string>(a.ranked().begin(), a.ranked().end()), (Toks{"y", "z", "w", "x"}));
  EXPECT_EQ(a.hash(), b.hash());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.id_of(a.token_of(static_cast<TokenId>(i))), static_cast<TokenId>(i));
}

TEST(Vocab, DecodeStopsAtEos) {
  const Vocab v = Vocab::build(std::vector<Toks>{{"hi", "there"}}, 10);
  const std::vector<TokenId> ids{kGo, v.id_of("hi"), kPad, v.id_of("there"), kEos, v.id_of("hi")};
  EXPECT_EQ(v.decode(ids), (Toks{"hi", "there"}));
  EXPECT_THROW(v.token_of(99), IndexError);
}

TEST_F(TempDir, VocabSaveLoad) {
  const Vocab v = Vocab::build(std::vector<Toks>{{"b", "a", "a", "c"}}, 10);
  v.save(dir / "v.txt");
  const Vocab w = Vocab::load(dir / "v.txt");
  EXPECT_EQ(w.hash(), v.hash());
  write("bad.txt", "a\nb\n");
  EXPECT_THROW(Vocab::load(dir / "bad.txt"), DataError);
}

TEST(Bucketize, Examples) {
  const BucketSpec spec;
  EXPECT_EQ(bucketize(8, 9, 9, spec), 0u);
  EXPECT_EQ(bucketize(8, 9, 12, spec), 1u);
  EXPECT_EQ(bucketize(25, 3, std::nullopt, spec), std::nullopt);
  EXPECT_EQ(bucketize(10, 10, std::nullopt, spec), 1u);  // target + EOS is 11
  EXPECT_EQ(bucketize(5, 19, std::nullopt, spec), 1u);
  EXPECT_EQ(bucketize(5, 20, std::nullopt, spec), std::nullopt);
}

TEST(BucketSpec, ParseAndValidate) {
  EXPECT_EQ(BucketSpec::parse("5:10,20:20").to_string(), "5:10,20:20");
  EXPECT_THROW(BucketSpec::parse("5-10"), DataError);
  EXPECT_THROW(BucketSpec::parse("20:20,10:10").validate(), ContractError);
}

TEST_F(TempDir, ParallelCorpusLoad) {
  const Vocab v = Vocab::build(std::vector<Toks>{{"hi", "how", "are", "you", "fine"}}, 20);
  const auto enc = write("a.enc", "Hi!\nHow are you?\nhi\n");
  const auto dec = write("a.dec", "hi\nfine.\nhow are you\n");
  const auto c = load_parallel_corpus({enc, dec, std::nullopt}, v, BucketSpec{});
  EXPECT_EQ(c.examples.size(), 3u);
  EXPECT_EQ(c.summary.total, 3u);
  EXPECT_EQ(c.examples[0].tgt.back(), kEos);

  const auto dec2 = write("b.dec", "x\ny\n");
  try {
    load_parallel_corpus({enc, dec2, std::nullopt}, v, BucketSpec{});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(std::string(e.what()), "line count mismatch 3 vs 2");
  }

  std::string longline;
  for (int i = 0; i < 30; ++i) longline += "hi ";
  const auto enc3 = write("c.enc", "hi\n" + longline + "\n");
  const auto dec3 = write("c.dec", "hi\nhi\n");
  const auto r = load_parallel_corpus({enc3, dec3, std::nullopt}, v, BucketSpec{});
  EXPECT_EQ(r.examples.size(), 1u);
  EXPECT_EQ(r.summary.rejected, 1u);
}

TEST_F(TempDir, AsrVariantForcesBucket) {
  const Vocab v = Vocab::build(std::vector<Toks>{{"a", "b"}}, 10);
  const auto enc = write("x.enc", "a b\n");
  const auto dec = write("x.dec", "b\n");
  const auto asr = write("x_asr.enc", "a a a a a a a a a a a a\n");
  const auto c = load_parallel_corpus({enc, dec, asr}, v, BucketSpec{});
  ASSERT_EQ(c.examples.size(), 1u);
  EXPECT_EQ(c.examples[0].bucket, 1u);
  EXPECT_EQ(c.examples[0].asr->size(), 12u);
}

TEST_F(TempDir, ReadWriteLines) {
  write("crlf.txt", "one\r\ntwo\nthree");
  EXPECT_EQ(read_lines(dir / "crlf.txt"), (Toks{"one", "two", "three"}));
  const Toks lines{"a", "", "b c"};
  write_lines(dir / "out.txt", lines);
  EXPECT_EQ(read_lines(dir / "out.txt"), lines);
  EXPECT_THROW(read_lines(dir / "missing.txt"), DataError);
}

TEST(Subset, SizesNestingAndDeterminism) {
  std::vector<int> items(10);
  for (int i = 0; i < 10; ++i) items[i] = i;
  EXPECT_EQ(subset_percentage<int>(items, 20, 1).size(), 2u);
  auto all = subset_percentage<int>(items, 100, 1);
  EXPECT_EQ(all.size(), 10u);
  EXPECT_NE(all, items);
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, items);
  EXPECT_EQ(subset_percentage<int>(items, 60, 3), subset_percentage<int>(items, 60, 3));
  const auto big = subset_percentage<int>(items, 80, 3), small = subset_percentage<int>(items, 40, 3);
  EXPECT_TRUE(std::equal(small.begin(), small.end(), big.begin()));
  EXPECT_THROW(subset_percentage<int>(items, 0, 1), ContractError);
  EXPECT_THROW(subset_percentage<int>(items, 101, 1), ContractError);
}

TEST(Synthetic, DeterministicAndWellFormed) {
  const auto a = generate_dialogs(200, 4), b = generate_dialogs(200, 4), c = generate_dialogs(200, 5);
  ASSERT_EQ(a.size(), 200u);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].prompt, b[i].prompt);
    EXPECT_EQ(a[i].response, b[i].response);
    EXPECT_FALSE(a[i].prompt.empty());
    EXPECT_FALSE(a[i].response.empty());
    EXPECT_EQ(a[i].prompt.find('{'), std::string::npos);
    differs = differs || a[i].prompt != c[i].prompt;
  }
  EXPECT_TRUE(differs);
}

}  // namespace
}  // namespace dualseq::data
