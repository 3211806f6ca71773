#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "monoseq/corpus.hpp"
#include "monoseq/errors.hpp"
#include "monoseq/synth.hpp"
#include "monoseq/textio.hpp"

using namespace monoseq;

namespace {

Corpus load(const std::string& text, bool strict = true, LoadReport* report = nullptr) {
  std::istringstream in(text);
  return load_pairs(in, strict, report);
}

}  // namespace

TEST(Utf8, RoundTripsMultibyte) {
  const std::string text = "a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x80";
  const auto decoded = utf8::decode(text);
  ASSERT_TRUE(decoded);
  EXPECT_EQ(*decoded, (Symbols{U'a', U'é', U'€', U'\U0001F600'}));
  EXPECT_EQ(utf8::encode(*decoded), text);
}

TEST(Utf8, RejectsMalformed) {
  EXPECT_FALSE(utf8::decode("\xC0\xAF"));          // overlong
  EXPECT_FALSE(utf8::decode("\xED\xA0\x80"));      // surrogate
  EXPECT_FALSE(utf8::decode("\xF4\x90\x80\x80"));  // above U+10FFFF
  EXPECT_FALSE(utf8::decode("\xE2\x82"));          // truncated
  EXPECT_FALSE(utf8::decode("\x80"));
}

TEST(TextIo, DoubleRoundTrip) {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-300, -2.5e17, 0.1}) {
    EXPECT_EQ(textio::parse_double(textio::format_double(v)), v);
  }
  EXPECT_THROW(textio::parse_double("1.5x", 7), FormatError);
}

TEST(LoadPairs, ParsesTableRow) {
  const auto c = load("Waterloo\twOtBr5u\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].source, U"Waterloo");
  EXPECT_EQ(c[0].target, U"wOtBr5u");
}

TEST(LoadPairs, EmptyTargetAllowed) {
  const auto c = load("a\t\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].target, U"");
}

TEST(LoadPairs, AlphabetIsUnionOfSymbols) {
  const auto c = load("ab\tab\ncd\tdc\n");
  EXPECT_EQ(c.source_alphabet(), (std::set<char32_t>{U'a', U'b', U'c', U'd'}));
  EXPECT_EQ(c.target_alphabet(), (std::set<char32_t>{U'a', U'b', U'c', U'd'}));
}

TEST(LoadPairs, KeepsLinesVerbatim) {
  const auto c = load("to_York_From \tX_y\r\n");
  EXPECT_EQ(c[0].source, U"to_York_From ");
  EXPECT_EQ(c[0].target, U"X_y");
}

TEST(LoadPairs, StrictRejectsBadTabCount) {
  try {
    load("ab\tab\nno tab here\n");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load("a\tb\tc\n"), FormatError);
  EXPECT_THROW(load("\tb\n"), FormatError);
}

TEST(LoadPairs, LenientSkipsAndCounts) {
  LoadReport report;
  const auto c = load("ab\tab\nbad\n\tempty\ncd\tdc\n", false, &report);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(report.lines_read, 4u);
  EXPECT_EQ(report.skipped, 2u);
  EXPECT_EQ(report.skipped_lines, (std::vector<std::size_t>{2, 3}));
}

TEST(LoadPairs, MalformedUtf8ReportsLine) {
  try {
    load("ok\tok\nb\xFF\tx\n", false);
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadPairs, ReservedBoundarySymbolRejected) {
  EXPECT_THROW(load("a\x02\tb\n"), FormatError);
}

TEST(LoadPairs, RoundTrip) {
  const auto c = load("Slutlerfim\tStuderfirn\na\t\n\xC3\xA9t\xC3\xA9\tete\n");
  std::ostringstream out;
  write_pairs(out, c);
  EXPECT_EQ(load(out.str()), c);
}

TEST(Split, SizesAndDisjointness) {
  const auto c = synth_generate(make_rule("identity"), 10, 3);
  std::vector<StringPair> distinct;
  for (std::size_t i = 0; i < 10; ++i) distinct.push_back({Symbols(1, U'a' + static_cast<char32_t>(i)), U""});
  const Corpus numbered(distinct);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [train, test] = split(numbered, {7, 3, seed});
    ASSERT_EQ(train.size(), 7u);
    ASSERT_EQ(test.size(), 3u);
    for (const auto& p : test.pairs())
      EXPECT_EQ(std::count(train.pairs().begin(), train.pairs().end(), p), 0);
    const auto again = split(numbered, {7, 3, seed});
    EXPECT_EQ(again.first, train);
    EXPECT_EQ(again.second, test);
  }
  EXPECT_THROW(split(c, {8, 3, 1}), ArgumentError);
}

TEST(Synth, IdentityPairsAreEqual) {
  const auto c = synth_generate(make_rule("identity"), 5, 1);
  ASSERT_EQ(c.size(), 5u);
  for (const auto& p : c.pairs()) EXPECT_EQ(p.source, p.target);
}

TEST(Synth, DeleteAfterT) {
  EXPECT_EQ(apply_rule(make_rule("delete"), U"tl"), U"t");
  EXPECT_EQ(apply_rule(make_rule("delete"), U"al"), U"al");
}

TEST(Synth, ExpandAndLocalSub) {
  EXPECT_EQ(apply_rule(make_rule("expand"), U"fim"), U"firn");
  EXPECT_EQ(apply_rule(make_rule("local_sub"), U"asks"), U"azks");
}

TEST(Synth, HarmonyFinalVowelCopiesInitial) {
  const auto rule = make_rule("harmony");
  EXPECT_EQ(apply_rule(rule, U"potate"), U"potato");
  const auto c = synth_generate(rule, 200, 9);
  for (const auto& p : c.pairs()) {
    const auto first = std::find_if(p.source.begin(), p.source.end(),
                                    [&](char32_t ch) { return rule.vowels.find(ch) != Symbols::npos; });
    const auto last = std::find_if(p.target.rbegin(), p.target.rend(),
                                   [&](char32_t ch) { return rule.vowels.find(ch) != Symbols::npos; });
    if (first != p.source.end()) {
      ASSERT_NE(last, p.target.rend());
      EXPECT_EQ(*last, *first);
    }
  }
}

TEST(Synth, OutputsSatisfyRuleOnReplay) {
  for (const char* name : {"identity", "local_sub", "expand", "delete", "harmony", "context2"}) {
    const auto rule = make_rule(name);
    const auto c = synth_generate(rule, 100, 5);
    for (const auto& p : c.pairs()) {
      EXPECT_GE(p.source.size(), rule.min_length);
      EXPECT_LE(p.source.size(), rule.max_length);
      EXPECT_EQ(apply_rule(rule, p.source), p.target) << name;
    }
  }
}

TEST(Synth, UnknownRuleRejected) { EXPECT_THROW(make_rule("metathesis"), ArgumentError); }

TEST(Synth, SeedDeterminism) {
  EXPECT_EQ(synth_generate(make_rule("expand"), 50, 11), synth_generate(make_rule("expand"), 50, 11));
  EXPECT_NE(synth_generate(make_rule("expand"), 50, 11), synth_generate(make_rule("expand"), 50, 12));
}
