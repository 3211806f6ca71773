#include "monoseq/aligner.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include "monoseq/errors.hpp"
#include "monoseq/logmath.hpp"
#include "monoseq/parallel.hpp"
#include "monoseq/textio.hpp"

namespace monoseq {

Symbols AlignedPair::source() const {
  Symbols out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.source);
  return out;
}

Symbols AlignedPair::target() const {
  Symbols out;
  for (const auto& s : steps) out += s.label;
  return out;
}

double AlignmentModel::log_prob(char32_t symbol, const OutputLabel& label) const {
  auto it = log_emit.find({symbol, label});
  return it == log_emit.end() ? kNegInf : it->second;
}

bool feasible(const StringPair& pair, std::size_t span_bound) {
  return !pair.source.empty() && pair.target.size() <= span_bound * pair.source.size();
}

namespace {

constexpr std::size_t kChunk = 64;

// One edge of the monotone lattice: from state (i, j) consume source[i] and
// emit target[j, j+len).
struct Edge {
  std::size_t i;
  std::size_t j;
  std::size_t len;
  std::size_t emission;
};

// Dense ids for every (symbol, label) usable by some edge of some pair.
class EmissionIndex {
 public:
  std::size_t intern(const EmissionKey& key) {
    auto [it, fresh] = ids_.try_emplace(key, keys_.size());
    if (fresh) keys_.push_back(key);
    return it->second;
  }
  std::size_t size() const { return keys_.size(); }
  const EmissionKey& key(std::size_t id) const { return keys_[id]; }

 private:
  std::map<EmissionKey, std::size_t> ids_;
  std::vector<EmissionKey> keys_;
};

struct PairLattice {
  std::size_t s = 0;
  std::size_t t = 0;
  std::vector<Edge> edges;  // ordered by i, then j, then len
};

PairLattice build_lattice(const StringPair& pair, std::size_t L, EmissionIndex& index) {
  PairLattice lat;
  lat.s = pair.source.size();
  lat.t = pair.target.size();
  auto valid = [&](std::size_t i, std::size_t j) {
    return j <= L * i && lat.t - j <= L * (lat.s - i);
  };
  for (std::size_t i = 0; i < lat.s; ++i) {
    for (std::size_t j = 0; j <= lat.t; ++j) {
      if (!valid(i, j)) continue;
      for (std::size_t len = 0; len <= L && j + len <= lat.t; ++len) {
        if (!valid(i + 1, j + len)) continue;
        const auto id = index.intern({pair.source[i], pair.target.substr(j, len)});
        lat.edges.push_back({i, j, len, id});
      }
    }
  }
  return lat;
}

struct Workspace {
  std::vector<double> alpha;
  std::vector<double> beta;
};

// Fills alpha/beta ((s+1) x (t+1), row-major) and returns log Z (forward).
double forward_backward(const PairLattice& lat, const std::vector<double>& logp, Workspace& ws) {
  const std::size_t cols = lat.t + 1;
  ws.alpha.assign((lat.s + 1) * cols, kNegInf);
  ws.beta.assign((lat.s + 1) * cols, kNegInf);
  ws.alpha[0] = 0.0;
  for (const auto& e : lat.edges) {
    const double a = ws.alpha[e.i * cols + e.j];
    const double w = logp[e.emission];
    if (a == kNegInf || w == kNegInf) continue;
    double& dst = ws.alpha[(e.i + 1) * cols + e.j + e.len];
    dst = log_add(dst, a + w);
  }
  ws.beta[lat.s * cols + lat.t] = 0.0;
  for (auto it = lat.edges.rbegin(); it != lat.edges.rend(); ++it) {
    const auto& e = *it;
    const double b = ws.beta[(e.i + 1) * cols + e.j + e.len];
    const double w = logp[e.emission];
    if (b == kNegInf || w == kNegInf) continue;
    double& dst = ws.beta[e.i * cols + e.j];
    dst = log_add(dst, b + w);
  }
  return ws.alpha[lat.s * cols + lat.t];
}

// Everything EM needs, precomputed once per corpus.
struct EmProblem {
  EmissionIndex index;
  std::vector<PairLattice> lattices;
  std::vector<std::size_t> excluded;
};

EmProblem build_problem(const Corpus& corpus, std::size_t L) {
  EmProblem p;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    if (!feasible(corpus[k], L)) {
      p.excluded.push_back(k);
      continue;
    }
    p.lattices.push_back(build_lattice(corpus[k], L, p.index));
  }
  return p;
}

std::vector<double> dense_log_probs(const AlignmentModel& model, const EmissionIndex& index) {
  std::vector<double> logp(index.size());
  for (std::size_t id = 0; id < index.size(); ++id) {
    const auto& [sym, label] = index.key(id);
    logp[id] = model.log_prob(sym, label);
  }
  return logp;
}

struct DenseCounts {
  std::vector<double> counts;
  double loglik = 0.0;
  std::size_t pairs = 0;
};

DenseCounts dense_e_step(const EmProblem& problem, const std::vector<double>& logp,
                         std::size_t threads) {
  const std::size_t chunks = chunk_count(problem.lattices.size(), kChunk);
  std::vector<DenseCounts> partial(chunks);
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    DenseCounts& out = partial[c];
    out.counts.assign(problem.index.size(), 0.0);
    Workspace ws;
    const std::size_t end = std::min(problem.lattices.size(), (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) {
      const auto& lat = problem.lattices[k];
      const double logz = forward_backward(lat, logp, ws);
      if (logz == kNegInf) continue;
      const std::size_t cols = lat.t + 1;
      for (const auto& e : lat.edges) {
        const double w = logp[e.emission];
        if (w == kNegInf) continue;
        const double post = ws.alpha[e.i * cols + e.j] + w +
                            ws.beta[(e.i + 1) * cols + e.j + e.len] - logz;
        if (post == kNegInf) continue;
        out.counts[e.emission] += std::exp(post);
      }
      out.loglik += logz;
      ++out.pairs;
    }
  });
  DenseCounts total;
  total.counts.assign(problem.index.size(), 0.0);
  for (const auto& part : partial) {
    for (std::size_t id = 0; id < part.counts.size(); ++id) total.counts[id] += part.counts[id];
    total.loglik += part.loglik;
    total.pairs += part.pairs;
  }
  return total;
}

void m_step(AlignmentModel& model, const EmissionIndex& index, const std::vector<double>& counts) {
  std::map<char32_t, double> per_symbol;
  for (std::size_t id = 0; id < index.size(); ++id) per_symbol[index.key(id).first] += counts[id];
  model.log_emit.clear();
  for (std::size_t id = 0; id < index.size(); ++id) {
    if (counts[id] <= 0.0) continue;
    const auto& key = index.key(id);
    model.log_emit[key] = std::log(counts[id] / per_symbol[key.first]);
  }
}

}  // namespace

AlignmentModel initial_alignment_model(const Corpus& corpus, std::size_t span_bound,
                                       double diagonal_bonus) {
  if (span_bound < 1) throw ArgumentError("span bound must be >= 1");
  EmProblem problem = build_problem(corpus, span_bound);
  std::vector<double> weight(problem.index.size(), 0.0);
  for (std::size_t id = 0; id < problem.index.size(); ++id) {
    const auto& [sym, label] = problem.index.key(id);
    weight[id] = 1.0 + ((label.size() == 1 && label[0] == sym) ? diagonal_bonus : 0.0);
  }
  AlignmentModel model;
  model.span_bound = span_bound;
  m_step(model, problem.index, weight);
  return model;
}

ExpectedCounts e_step(const AlignmentModel& model, const Corpus& corpus, std::size_t threads) {
  EmProblem problem = build_problem(corpus, model.span_bound);
  const auto dense = dense_e_step(problem, dense_log_probs(model, problem.index), threads);
  ExpectedCounts out;
  for (std::size_t id = 0; id < problem.index.size(); ++id)
    if (dense.counts[id] > 0.0) out.counts[problem.index.key(id)] = dense.counts[id];
  out.total_loglik = dense.loglik;
  out.pairs = dense.pairs;
  return out;
}

double pair_log_prob(const AlignmentModel& model, const StringPair& pair, bool backward) {
  if (!feasible(pair, model.span_bound)) return kNegInf;
  EmissionIndex index;
  const auto lat = build_lattice(pair, model.span_bound, index);
  Workspace ws;
  const double forward = forward_backward(lat, dense_log_probs(model, index), ws);
  return backward ? ws.beta[0] : forward;
}

AlignmentModel em_train(const Corpus& corpus, const EmConfig& config, EmReport* report) {
  if (config.span_bound < 1) throw ArgumentError("span bound must be >= 1");
  EmProblem problem = build_problem(corpus, config.span_bound);
  if (problem.lattices.empty()) throw TrainingError("em_train: every pair is infeasible");

  AlignmentModel model = initial_alignment_model(corpus, config.span_bound, config.diagonal_bonus);
  EmReport local;
  local.excluded = problem.excluded;

  auto stats = dense_e_step(problem, dense_log_probs(model, problem.index), config.threads);
  double avg = stats.loglik / static_cast<double>(stats.pairs);
  local.loglik_history.push_back(avg);

  for (std::size_t it = 0; it < config.max_iters; ++it) {
    m_step(model, problem.index, stats.counts);
    ++model.iterations_run;
    stats = dense_e_step(problem, dense_log_probs(model, problem.index), config.threads);
    const double next = stats.loglik / static_cast<double>(stats.pairs);
    local.loglik_history.push_back(next);
    const double gain = next - avg;
    avg = next;
    if (gain < config.tol) break;
  }
  model.final_loglik = avg;
  if (report) *report = std::move(local);
  return model;
}

AlignedPair viterbi_align(const AlignmentModel& model, const StringPair& pair) {
  const std::size_t L = model.span_bound;
  if (!feasible(pair, L)) throw AlignmentError("pair is infeasible under the span bound");
  const std::size_t s = pair.source.size();
  const std::size_t t = pair.target.size();
  const std::size_t cols = t + 1;
  // best[i][j]: best log-probability of completing the alignment from (i, j).
  std::vector<double> best((s + 1) * cols, kNegInf);
  best[s * cols + t] = 0.0;
  for (std::size_t i = s; i-- > 0;) {
    for (std::size_t j = 0; j <= t; ++j) {
      double b = kNegInf;
      for (std::size_t len = 0; len <= L && j + len <= t; ++len) {
        const double rest = best[(i + 1) * cols + j + len];
        if (rest == kNegInf) continue;
        const double lp = model.log_prob(pair.source[i], pair.target.substr(j, len));
        if (lp == kNegInf) continue;
        b = std::max(b, lp + rest);
      }
      best[i * cols + j] = b;
    }
  }
  if (best[0] == kNegInf) throw AlignmentError("no alignment with non-zero probability");

  AlignedPair out;
  std::size_t j = 0;
  for (std::size_t i = 0; i < s; ++i) {
    const double target_score = best[i * cols + j];
    for (std::size_t len = 0; len <= L && j + len <= t; ++len) {
      const double rest = best[(i + 1) * cols + j + len];
      if (rest == kNegInf) continue;
      const auto label = pair.target.substr(j, len);
      const double lp = model.log_prob(pair.source[i], label);
      if (lp == kNegInf) continue;
      if (lp + rest == target_score) {
        out.steps.push_back({pair.source[i], label});
        j += len;
        break;
      }
    }
  }
  return out;
}

std::set<OutputLabel> label_alphabet_of(const std::vector<AlignedPair>& aligned) {
  std::set<OutputLabel> labels{OutputLabel{}};
  for (const auto& a : aligned)
    for (const auto& step : a.steps) labels.insert(step.label);
  return labels;
}

AlignedCorpus align_corpus(const AlignmentModel& model, const Corpus& corpus) {
  AlignedCorpus out;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    try {
      out.aligned.push_back(viterbi_align(model, corpus[k]));
    } catch (const AlignmentError&) {
      ++out.skipped;
      out.skipped_indices.push_back(k);
    }
  }
  out.label_alphabet = label_alphabet_of(out.aligned);
  return out;
}

namespace {
constexpr const char* kModelMagic = "monoseq-align";
constexpr const char* kAlignedMagic = "monoseq-aligned";
constexpr std::size_t kFormatVersion = 1;

void expect_header(std::istream& in, const char* magic) {
  std::string line;
  if (!textio::read_line(in, line)) throw VersionError(std::string(magic) + ": empty file");
  const auto fields = textio::split(line, '\t');
  if (fields.size() != 2 || fields[0] != magic)
    throw VersionError("expected '" + std::string(magic) + "' header, found '" + line + "'");
  if (fields[1] != std::to_string(kFormatVersion))
    throw VersionError(std::string(magic) + ": unsupported format version " + std::string(fields[1]));
}

std::string_view expect_field(std::istream& in, std::string& line, std::string_view key,
                              std::size_t line_no) {
  if (!textio::read_line(in, line)) throw FormatError(line_no, "missing " + std::string(key));
  const auto tab = line.find('\t');
  if (tab == std::string::npos || std::string_view(line).substr(0, tab) != key)
    throw FormatError(line_no, "expected " + std::string(key));
  return std::string_view(line).substr(tab + 1);
}

Symbols decode_field(std::string_view bytes, std::size_t line_no) {
  auto s = utf8::decode(bytes);
  if (!s) throw DecodeError(line_no, "malformed UTF-8");
  return *s;
}
}  // namespace

void write_alignment_model(std::ostream& out, const AlignmentModel& model) {
  out << kModelMagic << '\t' << kFormatVersion << '\n';
  out << "span_bound\t" << model.span_bound << '\n';
  out << "iterations\t" << model.iterations_run << '\n';
  out << "final_loglik\t" << textio::format_double(model.final_loglik) << '\n';
  for (const auto& [key, lp] : model.log_emit) {
    out << utf8::encode(key.first) << '\t' << utf8::encode(key.second) << '\t'
        << textio::format_double(lp) << '\n';
  }
}

AlignmentModel read_alignment_model(std::istream& in) {
  expect_header(in, kModelMagic);
  AlignmentModel model;
  std::string line;
  model.span_bound = textio::parse_size(expect_field(in, line, "span_bound", 2), 2);
  model.iterations_run = textio::parse_size(expect_field(in, line, "iterations", 3), 3);
  model.final_loglik = textio::parse_double(expect_field(in, line, "final_loglik", 4), 4);
  std::size_t line_no = 4;
  while (textio::read_line(in, line)) {
    ++line_no;
    const auto f = textio::split(line, '\t');
    if (f.size() != 3) throw FormatError(line_no, "expected symbol<TAB>label<TAB>logprob");
    const auto sym = decode_field(f[0], line_no);
    if (sym.size() != 1) throw FormatError(line_no, "symbol must be one scalar value");
    model.log_emit[{sym[0], decode_field(f[1], line_no)}] = textio::parse_double(f[2], line_no);
  }
  return model;
}

void write_aligned(std::ostream& out, const std::vector<AlignedPair>& aligned) {
  out << kAlignedMagic << '\t' << kFormatVersion << '\n';
  for (const auto& a : aligned) {
    out << utf8::encode(a.source()) << '\t' << utf8::encode(a.target()) << '\t';
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
      if (i) out << ',';
      out << a.steps[i].label.size();
    }
    out << '\n';
  }
}

std::vector<AlignedPair> read_aligned(std::istream& in) {
  expect_header(in, kAlignedMagic);
  std::vector<AlignedPair> out;
  std::string line;
  std::size_t line_no = 1;
  while (textio::read_line(in, line)) {
    ++line_no;
    const auto f = textio::split(line, '\t');
    if (f.size() != 3) throw FormatError(line_no, "expected source<TAB>target<TAB>lengths");
    const auto source = decode_field(f[0], line_no);
    const auto target = decode_field(f[1], line_no);
    const auto lens = textio::split(f[2], ',');
    if (source.empty() || lens.size() != source.size())
      throw FormatError(line_no, "one label length per source symbol required");
    AlignedPair a;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < source.size(); ++i) {
      const auto len = textio::parse_size(lens[i], line_no);
      if (pos + len > target.size()) throw FormatError(line_no, "label lengths overrun target");
      a.steps.push_back({source[i], target.substr(pos, len)});
      pos += len;
    }
    if (pos != target.size()) throw FormatError(line_no, "label lengths do not cover target");
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace monoseq
