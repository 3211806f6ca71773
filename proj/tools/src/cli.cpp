#include "monoseq/cli/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <memory>
#include <ostream>

#include "monoseq/aligner.hpp"
#include "monoseq/cli/manifest.hpp"
#include "monoseq/corpus.hpp"
#include "monoseq/ensemble.hpp"
#include "monoseq/errors.hpp"
#include "monoseq/eval.hpp"
#include "monoseq/jointngram.hpp"
#include "monoseq/parallel.hpp"
#include "monoseq/pcrf.hpp"
#include "monoseq/synth.hpp"
#include "monoseq/textio.hpp"
#include "monoseq/utf8.hpp"

#ifndef MONOSEQ_VERSION
#define MONOSEQ_VERSION "0.0.0"
#endif

namespace monoseq::cli {

std::string_view tool_version() { return MONOSEQ_VERSION; }

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string input, output, model_out, train_out, test_out, references, predictions, output_prefix;
  std::vector<std::string> models, manifests;
  std::string rule, kind, buckets = "5,10,15,20";
  std::size_t train_size = 0, test_size = 0, n = 0;
  std::uint64_t seed = 0;
  bool lenient = false, with_timings = false;
  std::size_t threads = 1;
  std::size_t min_length = RuleSpec{}.min_length, max_length = RuleSpec{}.max_length;
  EmConfig em;
  TrainConfig train;
  FeatureConfig features;
  std::size_t order = 5;
  std::size_t ngram = 8;
  std::size_t beam = 16;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

template <class Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path);
  fn(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

Corpus load_corpus(const std::string& path, bool lenient, Manifest& m, const std::string& prefix) {
  auto in = open_in(path);
  LoadReport report;
  auto corpus = load_pairs(in, !lenient, &report);
  m.set(prefix + "lines_read", std::to_string(report.lines_read));
  m.set(prefix + "lines_skipped", std::to_string(report.skipped));
  return corpus;
}

std::vector<Symbols> read_lines(const std::string& path, bool first_field) {
  auto in = open_in(path);
  std::vector<Symbols> out;
  std::string line;
  while (textio::read_line(in, line)) {
    std::string_view text = line;
    if (first_field) text = text.substr(0, text.find('\t'));
    auto s = utf8::decode(text);
    if (!s) throw DecodeError(out.size() + 1, "invalid UTF-8 in " + path);
    out.push_back(std::move(*s));
  }
  return out;
}

void write_lines(std::ostream& out, const std::vector<Symbols>& lines) {
  for (const auto& l : lines) out << utf8::encode(l) << '\n';
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  for (auto part : textio::split(text, ',')) {
    try {
      out.push_back(textio::parse_size(part));
    } catch (const FormatError&) {
      throw ArgumentError("expected a comma-separated list of sizes, got '" + text + "'");
    }
  }
  return out;
}

enum class ModelKind { pcrf, jointngram };

ModelKind sniff_model(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  textio::read_line(in, line);
  const auto magic = line.substr(0, line.find('\t'));
  if (magic == kPcrfMagic) return ModelKind::pcrf;
  if (magic == kJointNgramMagic) return ModelKind::jointngram;
  throw VersionError(path + ": not a monoseq model file (header '" + line.substr(0, 40) + "')");
}

std::size_t longest_label(const std::set<OutputLabel>& labels) {
  std::size_t out = 1;
  for (const auto& l : labels) out = std::max(out, l.size());
  return out;
}

// Records every flag of `sub` with its effective value.
void record_args(const CLI::App& sub, Manifest& m) {
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    std::string value;
    if (opt->get_type_size() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : "\t") + r;
    } else if (!opt->get_default_str().empty()) {
      value = opt->get_default_str();
    } else {
      continue;
    }
    m.set("args." + name, value);
  }
}

Manifest start_manifest(const CLI::App& sub) {
  Manifest m;
  m.set("subcommand", sub.get_name());
  m.set("tool_version", std::string(tool_version()));
  record_args(sub, m);
  return m;
}

void cmd_split(const Options& o, Manifest& m) {
  const auto corpus = load_corpus(o.input, o.lenient, m, "");
  const auto [train, test] = split(corpus, {o.train_size, o.test_size, o.seed});
  write_file(o.train_out, [&](std::ostream& out) { write_pairs(out, train); });
  write_file(o.test_out, [&](std::ostream& out) { write_pairs(out, test); });
  m.save(manifest_path(o.train_out));
}

void cmd_synth(const Options& o, Manifest& m) {
  auto rule = make_rule(o.rule);
  rule.min_length = o.min_length;
  rule.max_length = o.max_length;
  const auto corpus = synth_generate(rule, o.n, o.seed);
  write_file(o.output, [&](std::ostream& out) { write_pairs(out, corpus); });
  m.save(manifest_path(o.output));
}

void cmd_align(const Options& o, Manifest& m, std::ostream& err) {
  const auto corpus = load_corpus(o.input, o.lenient, m, "");
  EmConfig cfg = o.em;
  cfg.threads = o.threads;
  const Timer timer;
  EmReport report;
  const auto model = em_train(corpus, cfg, &report);
  const auto aligned = align_corpus(model, corpus);
  m.set("align_seconds", timer.seconds());
  m.set("em_iterations", std::to_string(model.iterations_run));
  m.set("pairs_aligned", std::to_string(aligned.aligned.size()));
  m.set("pairs_skipped", std::to_string(aligned.skipped));
  if (aligned.skipped)
    err << "monoseq: " << aligned.skipped << " pair(s) cannot be aligned with span bound " << cfg.span_bound
        << " and were skipped\n";
  write_file(o.model_out, [&](std::ostream& out) { write_alignment_model(out, model); });
  write_file(o.output, [&](std::ostream& out) { write_aligned(out, aligned.aligned); });
  m.save(manifest_path(o.output));
}

void cmd_train(const Options& o, Manifest& m) {
  auto in = open_in(o.input);
  const auto aligned = read_aligned(in);
  if (aligned.empty()) throw TrainingError(o.input + ": no aligned pairs");
  const auto labels = label_alphabet_of(aligned);
  m.set("examples", std::to_string(aligned.size()));
  m.set("labels", std::to_string(labels.size()));
  const Timer timer;
  if (o.kind == "pcrf") {
    TrainConfig cfg = o.train;
    cfg.orders = TrainConfig::schedule_up_to(o.order);
    cfg.threads = o.threads;
    auto stack = sgd_train(aligned, labels, cfg, o.features);
    stack.span_bound = longest_label(labels);
    m.set("train_seconds", timer.seconds());
    write_file(o.output, [&](std::ostream& out) { write_model(out, stack); });
  } else {
    const auto sequences = build_graphones(aligned);
    auto lm = GraphoneLM::train(sequences, o.ngram);
    lm.span_bound = longest_label(labels);
    m.set("train_seconds", timer.seconds());
    write_file(o.output, [&](std::ostream& out) { lm.write(out); });
  }
  m.set("model_kind", o.kind);
  m.save(manifest_path(o.output));
}

void cmd_decode(const Options& o, Manifest& m) {
  std::vector<ModelStack> stacks;
  std::unique_ptr<GraphoneLM> lm;
  for (const auto& path : o.models) {
    const auto kind = sniff_model(path);
    auto in = open_in(path);
    if (kind == ModelKind::pcrf) {
      stacks.push_back(read_model(in));
    } else {
      if (o.models.size() > 1) throw ArgumentError("ensembles combine pcrf models only; " + path + " is jointngram");
      lm = std::make_unique<GraphoneLM>(GraphoneLM::read(in));
    }
  }
  const auto sources = read_lines(o.input, true);
  std::vector<Symbols> preds(sources.size());
  std::vector<std::reference_wrapper<const ModelStack>> refs(stacks.begin(), stacks.end());
  const Timer timer;
  parallel_chunks(chunk_count(sources.size(), 64), o.threads, [&](std::size_t c) {
    const std::size_t end = std::min(sources.size(), (c + 1) * 64);
    for (std::size_t i = c * 64; i < end; ++i) {
      if (lm)
        preds[i] = beam_decode(*lm, sources[i], o.beam);
      else if (refs.size() == 1)
        preds[i] = decode(stacks.front(), sources[i]);
      else
        preds[i] = ensemble_decode(refs, sources[i]);
    }
  });
  m.set("decode_seconds", timer.seconds());
  m.set("model_kind", lm ? "jointngram" : refs.size() > 1 ? "pcrf-ensemble" : "pcrf");
  m.set("lines", std::to_string(sources.size()));
  write_file(o.output, [&](std::ostream& out) { write_lines(out, preds); });
  m.save(manifest_path(o.output));
}

// Timings live in the manifests of the decode run and of its model.
void attach_timings(const Options& o, EvalReport& report) {
  const auto decode_manifest = manifest_path(o.predictions);
  if (!fs::exists(decode_manifest)) return;
  const auto dm = Manifest::load(decode_manifest);
  report.decode_seconds = dm.number("decode_seconds");
  if (auto model = dm.get("args.model"); model && model->find('\t') == std::string::npos) {
    const auto train_manifest = manifest_path(*model);
    if (fs::exists(train_manifest)) report.train_seconds = Manifest::load(train_manifest).number("train_seconds");
  }
}

void cmd_eval(const Options& o, Manifest& m) {
  const auto refs = load_corpus(o.references, o.lenient, m, "references_");
  const auto preds = read_lines(o.predictions, false);
  if (preds.size() != refs.size())
    throw DataError(o.predictions + " has " + std::to_string(preds.size()) + " lines but " + o.references +
                    " has " + std::to_string(refs.size()) + " pairs");
  const auto edges = parse_list(o.buckets);
  auto report = evaluate(refs.pairs(), preds, edges);
  report.config = {{"predictions", o.predictions}, {"references", o.references}};
  if (o.with_timings) attach_timings(o, report);
  const std::string table = o.output_prefix + ".txt", csv = o.output_prefix + ".csv";
  std::ofstream t(table, std::ios::binary), c(csv, std::ios::binary);
  if (!t || !c) throw IoError("cannot create " + table + " or " + csv);
  report_emit(report, t, c);
  m.set("wac", report.wac);
  m.set("count", std::to_string(report.count));
  m.set("correct", std::to_string(report.correct));
  m.save(manifest_path(o.output_prefix));
}

// One row per manifest: what ran and how long it took.
void cmd_report(const Options& o, Manifest& m) {
  const std::vector<std::string> columns = {"subcommand", "model_kind", "wac", "align_seconds", "train_seconds",
                                            "decode_seconds"};
  write_file(o.output, [&](std::ostream& out) {
    out << "run";
    for (const auto& c : columns) out << '\t' << c;
    out << '\n';
    for (const auto& path : o.manifests) {
      const auto run = Manifest::load(path);
      out << path;
      for (const auto& c : columns) out << '\t' << run.get(c).value_or("NA");
      out << '\n';
    }
  });
  m.save(manifest_path(o.output));
}

void add_threads(CLI::App* sub, Options& o) {
  sub->add_option("--threads", o.threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
}

void configure(CLI::App& app, Options& o) {
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", std::string(tool_version()));

  auto* split_cmd = app.add_subcommand("split", "Seeded train/test split of a TSV corpus");
  split_cmd->add_option("--input", o.input, "source<TAB>target file")->required();
  split_cmd->add_option("--train", o.train_size, "Training pairs")->required();
  split_cmd->add_option("--test", o.test_size, "Test pairs")->required();
  split_cmd->add_option("--seed", o.seed);
  split_cmd->add_option("--train-out", o.train_out)->required();
  split_cmd->add_option("--test-out", o.test_out)->required();
  split_cmd->add_flag("--lenient", o.lenient, "Skip malformed lines instead of failing");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic rewrite corpus");
  synth_cmd->add_option("--rule", o.rule, "identity, local_sub, expand, delete, harmony, context2")->required();
  synth_cmd->add_option("--n", o.n, "Number of pairs")->required();
  synth_cmd->add_option("--seed", o.seed);
  synth_cmd->add_option("--min-length", o.min_length);
  synth_cmd->add_option("--max-length", o.max_length);
  synth_cmd->add_option("--output", o.output)->required();

  auto* align_cmd = app.add_subcommand("align", "Train the EM aligner and align a corpus");
  align_cmd->add_option("--input", o.input)->required();
  align_cmd->add_option("--output", o.output, "Aligned corpus")->required();
  align_cmd->add_option("--model-out", o.model_out, "Alignment model")->required();
  align_cmd->add_option("--span-bound", o.em.span_bound, "Maximum output symbols per source symbol");
  align_cmd->add_option("--max-iters", o.em.max_iters);
  align_cmd->add_option("--tol", o.em.tol);
  align_cmd->add_option("--diagonal-bonus", o.em.diagonal_bonus);
  align_cmd->add_flag("--lenient", o.lenient);
  add_threads(align_cmd, o);

  auto* train_cmd = app.add_subcommand("train", "Train a pcrf or jointngram model on an aligned corpus");
  train_cmd->add_option("--input", o.input, "Aligned corpus")->required();
  train_cmd->add_option("--output", o.output, "Model file")->required();
  train_cmd->add_option("--kind", o.kind)->required()->check(CLI::IsMember({"pcrf", "jointngram"}));
  train_cmd->add_option("--order", o.order, "pcrf: final order; orders 1..order are trained in turn");
  train_cmd->add_option("--window", o.features.window, "pcrf: source positions on each side");
  train_cmd->add_option("--max-mgram", o.features.max_mgram, "pcrf: longest window n-gram feature");
  train_cmd->add_option("--tau", o.train.tau, "pcrf: pruning threshold");
  train_cmd->add_option("--top-k", o.train.top_k, "pcrf: candidates kept per position");
  train_cmd->add_option("--epochs", o.train.epochs);
  train_cmd->add_option("--eta0", o.train.eta0);
  train_cmd->add_option("--lambda", o.train.lambda);
  train_cmd->add_option("--seed", o.train.seed);
  train_cmd->add_option("--batch-size", o.train.batch_size);
  train_cmd->add_option("--support-threshold", o.train.support_threshold);
  train_cmd->add_option("--n", o.ngram, "jointngram: n-gram order");
  add_threads(train_cmd, o);

  auto* decode_cmd = app.add_subcommand("decode", "Predict one output per input line");
  decode_cmd->add_option("--model", o.models, "Model file; repeat to ensemble pcrf models")->required();
  decode_cmd->add_option("--input", o.input, "Plain lines or TSV (first column is used)")->required();
  decode_cmd->add_option("--output", o.output)->required();
  decode_cmd->add_option("--beam", o.beam, "jointngram: beam width")->check(CLI::PositiveNumber);
  add_threads(decode_cmd, o);

  auto* eval_cmd = app.add_subcommand("eval", "Word accuracy overall and by source length");
  eval_cmd->add_option("--predictions", o.predictions)->required();
  eval_cmd->add_option("--references", o.references, "source<TAB>target file")->required();
  eval_cmd->add_option("--output-prefix", o.output_prefix, "Writes <prefix>.txt and <prefix>.csv")->required();
  eval_cmd->add_option("--buckets", o.buckets, "Ascending bucket edges");
  eval_cmd->add_flag("--with-timings", o.with_timings, "Add train/decode seconds from manifests to the table");
  eval_cmd->add_flag("--lenient", o.lenient);

  auto* report_cmd = app.add_subcommand("report", "Tabulate run manifests: accuracy and timings");
  report_cmd->add_option("--manifest", o.manifests)->required();
  report_cmd->add_option("--output", o.output)->required();

  auto* replay_cmd = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
  replay_cmd->add_option("--manifest", o.input)->required();
}

int replay(const std::string& path, std::ostream& out, std::ostream& err) {
  const auto m = Manifest::load(path);
  const auto sub = m.get("subcommand");
  if (!sub || *sub == "replay") throw DataError(path + ": no replayable subcommand");
  if (m.get("tool_version") != std::string(tool_version()))
    err << "monoseq: warning: manifest written by version " << m.get("tool_version").value_or("?") << "\n";

  // Flags need the parser to tell them apart from valued options.
  CLI::App probe;
  Options scratch;
  configure(probe, scratch);
  const CLI::App* target = probe.get_subcommand(*sub);
  std::vector<std::string> args = {*sub};
  for (const auto& [key, value] : m.entries()) {
    if (!key.starts_with("args.")) continue;
    const std::string name = key.substr(5);
    const CLI::Option* opt = target->get_option_no_throw("--" + name);
    if (!opt) throw DataError(path + ": unknown flag --" + name);
    if (opt->get_type_size() == 0) {
      if (value == "true") args.push_back("--" + name);
      continue;
    }
    for (auto part : textio::split(value, '\t')) {
      args.push_back("--" + name);
      args.emplace_back(part);
    }
  }
  return run(args, out, err);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Monotone string-to-string translation: alignment, pcrf and joint n-gram models", "monoseq");
  Options o;
  configure(app, o);

  std::vector<std::string> storage = {"monoseq"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "replay") return replay(o.input, out, err);
    auto m = start_manifest(*sub);
    if (name == "split") cmd_split(o, m);
    else if (name == "synth") cmd_synth(o, m);
    else if (name == "align") cmd_align(o, m, err);
    else if (name == "train") cmd_train(o, m);
    else if (name == "decode") cmd_decode(o, m);
    else if (name == "eval") cmd_eval(o, m);
    else if (name == "report") cmd_report(o, m);
    return kExitOk;
  } catch (const ArgumentError& e) {
    err << "monoseq " << name << ": usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const VersionError& e) {
    err << "monoseq " << name << ": incompatible file: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "monoseq " << name << ": error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace monoseq::cli
