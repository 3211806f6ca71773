#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "../support/oracles.hpp"
#include "monoseq/aligner.hpp"
#include "monoseq/errors.hpp"
#include "monoseq/synth.hpp"

using namespace monoseq;

namespace {

Corpus corpus_of(std::initializer_list<std::pair<const char32_t*, const char32_t*>> rows) {
  std::vector<StringPair> pairs;
  for (const auto& [s, t] : rows) pairs.push_back({s, t});
  return Corpus(std::move(pairs));
}

// Hand-set model over the symbols of "ab" with every label up to length 2.
AlignmentModel toy_model() {
  AlignmentModel m;
  m.span_bound = 2;
  const std::vector<std::pair<EmissionKey, double>> probs = {
      {{U'a', U""}, 0.1},  {{U'a', U"a"}, 0.5},  {{U'a', U"b"}, 0.1},  {{U'a', U"ab"}, 0.2},
      {{U'a', U"bb"}, 0.1}, {{U'b', U""}, 0.05}, {{U'b', U"b"}, 0.6},  {{U'b', U"bb"}, 0.3},
      {{U'b', U"a"}, 0.05},
  };
  for (const auto& [k, p] : probs) m.log_emit[k] = std::log(p);
  return m;
}

}  // namespace

TEST(Feasible, SpanBound) {
  EXPECT_TRUE(feasible({U"ab", U"abab"}, 2));
  EXPECT_FALSE(feasible({U"a", U"ab"}, 1));
  EXPECT_TRUE(feasible({U"ab", U""}, 1));
}

TEST(EmTrain, IdentityCorpusConvergesToDiagonal) {
  const auto c = synth_generate(make_rule("identity"), 200, 4);
  EmConfig cfg;
  cfg.max_iters = 200;
  cfg.tol = -std::numeric_limits<double>::infinity();
  const auto m = em_train(c, cfg);
  for (char32_t s : c.source_alphabet()) EXPECT_NEAR(std::exp(m.log_prob(s, Symbols(1, s))), 1.0, 1e-6);
}

TEST(EmTrain, InfeasiblePairExcluded) {
  const auto c = corpus_of({{U"ab", U"ab"}, {U"a", U"ab"}});
  EmConfig cfg;
  cfg.span_bound = 1;
  EmReport report;
  em_train(c, cfg, &report);
  EXPECT_EQ(report.excluded, (std::vector<std::size_t>{1}));
}

TEST(EmTrain, AllInfeasibleIsTrainingError) {
  EmConfig cfg;
  cfg.span_bound = 1;
  EXPECT_THROW(em_train(corpus_of({{U"a", U"abc"}}), cfg), TrainingError);
}

TEST(EmTrain, EmissionsNormalizedPerSymbol) {
  const auto m = em_train(synth_generate(make_rule("expand"), 300, 2), EmConfig{});
  std::map<char32_t, double> sums;
  for (const auto& [k, lp] : m.log_emit) sums[k.first] += std::exp(lp);
  for (const auto& [s, total] : sums) EXPECT_NEAR(total, 1.0, 1e-9) << static_cast<int>(s);
}

TEST(EmTrain, LogLikelihoodNonDecreasing) {
  EmConfig cfg;
  cfg.tol = -std::numeric_limits<double>::infinity();
  EmReport report;
  em_train(synth_generate(make_rule("delete"), 300, 8), cfg, &report);
  ASSERT_EQ(report.loglik_history.size(), cfg.max_iters + 1);
  for (std::size_t i = 1; i < report.loglik_history.size(); ++i)
    EXPECT_GE(report.loglik_history[i], report.loglik_history[i - 1] - 1e-9) << i;
}

TEST(EStep, MatchesEnumeration) {
  const auto c = corpus_of({{U"ab", U"ab"}, {U"ab", U"aab"}});
  const auto m = initial_alignment_model(c, 2, 0.1);
  const auto counts = e_step(m, c);
  std::map<EmissionKey, double> expected;
  double loglik = 0.0;
  for (const auto& p : c.pairs()) {
    const auto post = oracle::alignment_posterior(m, p);
    loglik += post.log_z;
    for (const auto& [k, v] : post.counts) expected[k] += v;
  }
  EXPECT_NEAR(counts.total_loglik, loglik, 1e-9);
  for (const auto& [k, v] : expected) {
    auto it = counts.counts.find(k);
    const double got = it == counts.counts.end() ? 0.0 : it->second;
    EXPECT_NEAR(got, v, 1e-9);
  }
  for (const auto& [k, v] : counts.counts) EXPECT_TRUE(expected.contains(k) || std::abs(v) < 1e-12);
}

TEST(EStep, ThreadCountDoesNotChangeCounts) {
  const auto c = synth_generate(make_rule("expand"), 300, 6);
  const auto m = initial_alignment_model(c, 2, 0.1);
  const auto one = e_step(m, c, 1);
  const auto four = e_step(m, c, 4);
  EXPECT_EQ(one.counts, four.counts);
  EXPECT_EQ(one.total_loglik, four.total_loglik);
}

TEST(PairLogProb, ForwardEqualsBackward) {
  const auto m = toy_model();
  for (const StringPair p : {StringPair{U"ab", U"abb"}, StringPair{U"abba", U"abbab"},
                             StringPair{U"aab", U"ab"}, StringPair{U"ba", U"bbbb"}}) {
    const double f = pair_log_prob(m, p, false);
    const double b = pair_log_prob(m, p, true);
    EXPECT_NEAR(f, b, 1e-9 * std::abs(f));
    EXPECT_NEAR(f, oracle::alignment_posterior(m, p).log_z, 1e-9);
  }
}

TEST(ViterbiAlign, MatchesEnumerationArgmax) {
  const auto m = toy_model();
  for (const StringPair p : {StringPair{U"ab", U"abb"}, StringPair{U"abab", U"abbab"},
                             StringPair{U"aabba", U"abbbb"}, StringPair{U"bbaab", U"bbbbaab"}}) {
    const auto best = viterbi_align(m, p);
    double best_lp = -INFINITY;
    for (const auto& a : oracle::alignments(p, 2))
      best_lp = std::max(best_lp, oracle::alignment_log_prob(m, p, a));
    std::vector<OutputLabel> labels;
    for (const auto& s : best.steps) labels.push_back(s.label);
    EXPECT_NEAR(oracle::alignment_log_prob(m, p, labels), best_lp, 1e-12);
    EXPECT_EQ(best.source(), p.source);
    EXPECT_EQ(best.target(), p.target);
  }
}

TEST(ViterbiAlign, TiesPreferShorterLabelsEarlier) {
  AlignmentModel m;
  m.span_bound = 2;
  // ("", "xx") and ("x", "x") both score 0.25.
  m.log_emit[{U'a', U""}] = std::log(0.5);
  m.log_emit[{U'a', U"x"}] = std::log(0.5);
  m.log_emit[{U'b', U"x"}] = std::log(0.5);
  m.log_emit[{U'b', U"xx"}] = std::log(0.5);
  const auto best = viterbi_align(m, {U"ab", U"xx"});
  EXPECT_EQ(best.steps[0].label, U"");
  EXPECT_EQ(best.steps[1].label, U"xx");
}

TEST(ViterbiAlign, InfeasibleIsAlignmentError) {
  EXPECT_THROW(viterbi_align(toy_model(), {U"a", U"abab"}), AlignmentError);
}

TEST(ViterbiAlign, RecoversOcrConfusions) {
  // Confusions taken from a Fraktur-style OCR corpus: l->t, t->d, l->nothing, m->rn.
  std::vector<StringPair> pairs;
  const std::vector<std::pair<Symbols, Symbols>> seeds = {
      {U"Slutlerfim", U"Studerfirn"}, {U"fim", U"firn"},   {U"Slu", U"Stu"},   {U"lutle", U"tude"},
      {U"ste", U"ste"},               {U"rufe", U"rufe"},  {U"Sieg", U"Sieg"}, {U"tier", U"dier"},
      {U"mit", U"rnit"},              {U"Slim", U"Stirn"}, {U"ruf", U"ruf"},   {U"eft", U"eft"},
      {U"Stufe", U"Stufe"},           {U"tle", U"de"},     {U"fur", U"fur"},   {U"reis", U"reis"},
  };
  for (int rep = 0; rep < 8; ++rep)
    for (const auto& [s, t] : seeds) pairs.push_back({s, t});
  EmConfig cfg;
  cfg.max_iters = 100;
  const auto m = em_train(Corpus(pairs), cfg);
  const auto a = viterbi_align(m, {U"Slutlerfim", U"Studerfirn"});
  const std::vector<OutputLabel> expected = {U"S", U"t", U"u", U"d", U"",  U"e",
                                             U"r", U"f", U"i", U"rn"};
  ASSERT_EQ(a.steps.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(a.steps[i].label, expected[i]) << i;
}

TEST(AlignCorpus, IdentityAlphabet) {
  const auto c = synth_generate(make_rule("identity"), 50, 1);
  const auto m = em_train(c, EmConfig{});
  const auto ac = align_corpus(m, c);
  std::set<OutputLabel> expected = {U""};
  for (char32_t s : c.source_alphabet()) expected.insert(Symbols(1, s));
  EXPECT_EQ(ac.label_alphabet, expected);
  for (const auto& a : ac.aligned)
    for (const auto& s : a.steps) EXPECT_EQ(s.label, Symbols(1, s.source));
}

TEST(AlignCorpus, ExpansionLabelPresent) {
  const auto c = synth_generate(make_rule("expand"), 200, 3);
  const auto ac = align_corpus(em_train(c, EmConfig{}), c);
  EXPECT_TRUE(ac.label_alphabet.contains(U"rn"));
  for (std::size_t i = 0; i < ac.aligned.size(); ++i) EXPECT_EQ(ac.aligned[i].target(), c[i].target);
}

TEST(AlignCorpus, InfeasibleSkipped) {
  const auto c = corpus_of({{U"ab", U"ab"}, {U"a", U"ab"}, {U"b", U"b"}});
  EmConfig cfg;
  cfg.span_bound = 1;
  const auto ac = align_corpus(em_train(c, cfg), c);
  EXPECT_EQ(ac.skipped, 1u);
  EXPECT_EQ(ac.skipped_indices, (std::vector<std::size_t>{1}));
  EXPECT_EQ(ac.aligned.size(), 2u);
}

TEST(AlignmentIo, ModelRoundTripIsByteStable) {
  const auto m = em_train(synth_generate(make_rule("expand"), 100, 3), EmConfig{});
  std::ostringstream a;
  write_alignment_model(a, m);
  std::istringstream in(a.str());
  const auto back = read_alignment_model(in);
  EXPECT_EQ(back.log_emit, m.log_emit);
  EXPECT_EQ(back.span_bound, m.span_bound);
  std::ostringstream b;
  write_alignment_model(b, back);
  EXPECT_EQ(a.str(), b.str());
}

TEST(AlignmentIo, AlignedRoundTrip) {
  const auto c = synth_generate(make_rule("delete"), 60, 3);
  const auto ac = align_corpus(em_train(c, EmConfig{}), c);
  std::ostringstream out;
  write_aligned(out, ac.aligned);
  std::istringstream in(out.str());
  EXPECT_EQ(read_aligned(in), ac.aligned);
}

TEST(AlignmentIo, BadHeaderIsVersionError) {
  std::istringstream in("monoseq-align\t99\n");
  EXPECT_THROW(read_alignment_model(in), VersionError);
}
