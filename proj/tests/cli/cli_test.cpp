#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "monoseq/aligner.hpp"
#include "monoseq/cli/cli.hpp"
#include "monoseq/cli/manifest.hpp"
#include "monoseq/errors.hpp"

namespace fs = std::filesystem;
using monoseq::cli::Manifest;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("monoseq_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return monoseq::cli::run(args, out_, err_);
  }

  Manifest manifest(const std::string& output) const { return Manifest::load(path(output) + ".manifest"); }

  // A small aligned identity corpus: align + fast pcrf and jointngram models.
  void identity_models() {
    std::string tsv;
    for (const char* w : {"abc", "cab", "bca", "aabb", "ccba", "abcabc", "ba", "c", "bbc", "acab"})
      tsv += std::string(w) + "\t" + w + "\n";
    write("id.tsv", tsv);
    ASSERT_EQ(run({"align", "--input", path("id.tsv"), "--output", path("id.aln"), "--model-out", path("id.am")}), 0);
    ASSERT_EQ(run({"train", "--kind", "pcrf", "--input", path("id.aln"), "--output", path("id.pcrf"), "--order",
                   "2", "--window", "1", "--max-mgram", "1", "--epochs", "5", "--top-k", "3"}),
              0)
        << err_.str();
    ASSERT_EQ(run({"train", "--kind", "jointngram", "--input", path("id.aln"), "--output", path("id.jng"), "--n",
                   "3"}),
              0);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, NoSubcommandIsUsageError) { EXPECT_EQ(run({}), 2); }

TEST_F(CliTest, UnknownFlagIsUsageError) { EXPECT_EQ(run({"synth", "--rule", "expand", "--n", "3", "-o", "x"}), 2); }

TEST_F(CliTest, SynthAndSplitAreSeeded) {
  ASSERT_EQ(run({"synth", "--rule", "expand", "--n", "50", "--seed", "4", "--output", path("a.tsv")}), 0);
  ASSERT_EQ(run({"synth", "--rule", "expand", "--n", "50", "--seed", "4", "--output", path("b.tsv")}), 0);
  EXPECT_EQ(read("a.tsv"), read("b.tsv"));
  ASSERT_EQ(run({"split", "--input", path("a.tsv"), "--train", "40", "--test", "10", "--seed", "2", "--train-out",
                 path("tr.tsv"), "--test-out", path("te.tsv")}),
            0);
  const auto tr = read("tr.tsv"), te = read("te.tsv");
  EXPECT_EQ(std::count(tr.begin(), tr.end(), '\n'), 40);
  EXPECT_EQ(std::count(te.begin(), te.end(), '\n'), 10);
  EXPECT_EQ(manifest("tr.tsv").get("args.seed"), "2");
}

TEST_F(CliTest, AlignIdentityGivesSymbolLabels) {
  write("id.tsv", "abc\tabc\nba\tba\ncab\tcab\n");
  ASSERT_EQ(run({"align", "--input", path("id.tsv"), "--output", path("id.aln"), "--model-out", path("id.am")}), 0);
  const auto m = manifest("id.aln");
  EXPECT_EQ(m.get("pairs_skipped"), "0");
  EXPECT_EQ(m.get("pairs_aligned"), "3");
  std::istringstream in(read("id.aln"));
  const auto aligned = monoseq::read_aligned(in);
  ASSERT_EQ(aligned.size(), 3u);
  for (const auto& a : aligned)
    for (const auto& step : a.steps) EXPECT_EQ(step.label, std::u32string(1, step.source));
}

TEST_F(CliTest, InfeasibleLineIsSkippedAndCounted) {
  write("c.tsv", "ab\tab\nab\tabcde\nb\tb\n");
  ASSERT_EQ(run({"align", "--input", path("c.tsv"), "--output", path("c.aln"), "--model-out", path("c.am"),
                 "--span-bound", "1"}),
            0);
  EXPECT_EQ(manifest("c.aln").get("pairs_skipped"), "1");
  EXPECT_NE(err_.str().find("1 pair(s)"), std::string::npos);
}

TEST_F(CliTest, AlignRerunIsByteIdentical) {
  ASSERT_EQ(run({"synth", "--rule", "delete", "--n", "60", "--seed", "9", "--output", path("d.tsv")}), 0);
  for (const char* tag : {"1", "2"})
    ASSERT_EQ(run({"align", "--input", path("d.tsv"), "--output", path(std::string("d") + tag + ".aln"),
                   "--model-out", path(std::string("d") + tag + ".am")}),
              0);
  EXPECT_EQ(read("d1.aln"), read("d2.aln"));
  EXPECT_EQ(read("d1.am"), read("d2.am"));
}

TEST_F(CliTest, StrictLoadRejectsMalformedLineLenientCountsIt) {
  write("m.tsv", "ab\tab\nno tab here\nb\tb\n");
  EXPECT_EQ(run({"align", "--input", path("m.tsv"), "--output", path("m.aln"), "--model-out", path("m.am")}), 1);
  EXPECT_NE(err_.str().find("line 2"), std::string::npos);
  ASSERT_EQ(run({"align", "--input", path("m.tsv"), "--output", path("m.aln"), "--model-out", path("m.am"),
                 "--lenient"}),
            0);
  EXPECT_EQ(manifest("m.aln").get("lines_skipped"), "1");
}

TEST_F(CliTest, TrainEchoesConfigIntoManifest) {
  identity_models();
  ASSERT_EQ(run({"train", "--kind", "pcrf", "--input", path("id.aln"), "--output", path("o4.pcrf"), "--order", "4",
                 "--window", "4", "--epochs", "1", "--top-k", "2"}),
            0);
  const auto m = manifest("o4.pcrf");
  EXPECT_EQ(m.get("args.order"), "4");
  EXPECT_EQ(m.get("args.window"), "4");
  EXPECT_TRUE(m.number("train_seconds"));
  EXPECT_EQ(manifest("id.jng").get("args.n"), "3");
  ASSERT_EQ(run({"train", "--kind", "jointngram", "--input", path("id.aln"), "--output", path("n8.jng"), "--n", "8"}),
            0);
  EXPECT_EQ(manifest("n8.jng").get("args.n"), "8");
}

TEST_F(CliTest, UnknownModelKindIsUsageError) {
  write("x.aln", "");
  EXPECT_EQ(run({"train", "--kind", "hmm", "--input", path("x.aln"), "--output", path("x.m")}), 2);
}

TEST_F(CliTest, DecodeIdentityAndEmptyInput) {
  identity_models();
  write("in.txt", "abc\n\ncba\n");
  write("empty.txt", "");
  for (const char* model : {"id.pcrf", "id.jng"}) {
    ASSERT_EQ(run({"decode", "--model", path(model), "--input", path("in.txt"), "--output", path("out.txt")}), 0);
    EXPECT_EQ(read("out.txt"), "abc\n\ncba\n") << model;
    ASSERT_EQ(run({"decode", "--model", path(model), "--input", path("empty.txt"), "--output", path("e.txt")}), 0);
    EXPECT_EQ(read("e.txt"), "");
  }
}

TEST_F(CliTest, DecodeReadsFirstColumnOfTsv) {
  identity_models();
  write("in.tsv", "abc\tignored\nba\tzz\n");
  ASSERT_EQ(run({"decode", "--model", path("id.pcrf"), "--input", path("in.tsv"), "--output", path("o.txt")}), 0);
  EXPECT_EQ(read("o.txt"), "abc\nba\n");
}

TEST_F(CliTest, CorruptedModelHeaderFailsWithVersionDiagnostic) {
  identity_models();
  auto text = read("id.pcrf");
  text.replace(text.find('\t') + 1, 1, "9");
  write("bad.pcrf", text);
  write("in.txt", "abc\n");
  EXPECT_EQ(run({"decode", "--model", path("bad.pcrf"), "--input", path("in.txt"), "--output", path("o.txt")}), 1);
  EXPECT_NE(err_.str().find("version"), std::string::npos) << err_.str();
  write("junk.pcrf", "not a model\n");
  EXPECT_EQ(run({"decode", "--model", path("junk.pcrf"), "--input", path("in.txt"), "--output", path("o.txt")}), 1);
}

TEST_F(CliTest, EnsembleOfJointNgramIsRejected) {
  identity_models();
  write("in.txt", "abc\n");
  EXPECT_EQ(run({"decode", "--model", path("id.pcrf"), "--model", path("id.jng"), "--input", path("in.txt"),
                 "--output", path("o.txt")}),
            2);
  ASSERT_EQ(run({"decode", "--model", path("id.pcrf"), "--model", path("id.pcrf"), "--input", path("in.txt"),
                 "--output", path("o.txt")}),
            0);
  EXPECT_EQ(read("o.txt"), "abc\n");
}

TEST_F(CliTest, EvalPercentagesAndBuckets) {
  write("ref.tsv", "ab\tx\ncd\ty\nef\tz\ngh\tw\n");
  write("all.txt", "x\ny\nz\nw\n");
  write("half.txt", "x\ny\nq\nq\n");
  ASSERT_EQ(run({"eval", "--predictions", path("all.txt"), "--references", path("ref.tsv"), "--output-prefix",
                 path("r1")}),
            0);
  EXPECT_NE(read("r1.txt").find("100.00%"), std::string::npos);
  ASSERT_EQ(run({"eval", "--predictions", path("half.txt"), "--references", path("ref.tsv"), "--output-prefix",
                 path("r2"), "--buckets", "5,10,15,20"}),
            0);
  EXPECT_NE(read("r2.txt").find("50.00%"), std::string::npos);
  const auto csv = read("r2.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 + 1);
  EXPECT_EQ(manifest("r2").get("wac"), "0.5");
}

TEST_F(CliTest, EvalInputErrors) {
  write("ref.tsv", "ab\tx\ncd\ty\n");
  write("p.txt", "x\n");
  EXPECT_EQ(run({"eval", "--predictions", path("p.txt"), "--references", path("ref.tsv"), "--output-prefix",
                 path("r")}),
            1);
  write("p2.txt", "x\ny\n");
  EXPECT_EQ(run({"eval", "--predictions", path("p2.txt"), "--references", path("ref.tsv"), "--output-prefix",
                 path("r"), "--buckets", "10,5"}),
            2);
}

TEST_F(CliTest, EvalWithTimingsAndReportTable) {
  identity_models();
  write("ref.tsv", "abc\tabc\nba\tba\n");
  ASSERT_EQ(run({"decode", "--model", path("id.pcrf"), "--input", path("ref.tsv"), "--output", path("p.txt")}), 0);
  ASSERT_EQ(run({"eval", "--predictions", path("p.txt"), "--references", path("ref.tsv"), "--output-prefix",
                 path("ev"), "--with-timings"}),
            0);
  const auto table = read("ev.txt");
  EXPECT_NE(table.find("train_seconds: "), std::string::npos);
  EXPECT_NE(table.find("decode_seconds: "), std::string::npos);
  EXPECT_EQ(read("ev.csv").find("seconds"), std::string::npos);
  ASSERT_EQ(run({"report", "--manifest", path("id.pcrf.manifest"), "--manifest", path("ev.manifest"), "--output",
                 path("rep.tsv")}),
            0);
  const auto rep = read("rep.tsv");
  EXPECT_EQ(rep.substr(0, rep.find('\n')), "run\tsubcommand\tmodel_kind\twac\talign_seconds\ttrain_seconds\tdecode_seconds");
  EXPECT_NE(rep.find("\teval\tNA\t1\t"), std::string::npos);
}

TEST_F(CliTest, ReplayReproducesOutputs) {
  identity_models();
  const auto original = read("id.pcrf");
  fs::remove(path("id.pcrf"));
  ASSERT_EQ(run({"replay", "--manifest", path("id.pcrf.manifest")}), 0) << err_.str();
  EXPECT_EQ(read("id.pcrf"), original);
  const auto aligned = read("id.aln");
  ASSERT_EQ(run({"replay", "--manifest", path("id.aln.manifest")}), 0);
  EXPECT_EQ(read("id.aln"), aligned);
}

TEST(Manifest, SortedRoundTrip) {
  Manifest m;
  m.set("zeta", "1");
  m.set("alpha", "two words");
  m.set("args.model", "a\tb");
  m.set("x", 0.25);
  std::ostringstream out;
  m.write(out);
  EXPECT_EQ(out.str(), "alpha=two words\nargs.model=a\tb\nx=0.25\nzeta=1\n");
  std::istringstream in(out.str());
  EXPECT_EQ(Manifest::read(in).entries(), m.entries());
  std::istringstream bad("novalue\n");
  EXPECT_THROW(Manifest::read(bad), monoseq::FormatError);
  EXPECT_THROW(m.set("a=b", "c"), monoseq::ArgumentError);
}
