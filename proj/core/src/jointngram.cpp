#include "monoseq/jointngram.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "monoseq/errors.hpp"
#include "monoseq/logmath.hpp"
#include "monoseq/textio.hpp"

namespace monoseq {

std::vector<GraphoneSequence> build_graphones(std::span<const AlignedPair> aligned) {
  std::vector<GraphoneSequence> out;
  out.reserve(aligned.size());
  for (const auto& a : aligned) {
    GraphoneSequence seq;
    seq.reserve(a.steps.size() + 2);
    seq.push_back(Graphone::begin());
    for (const auto& step : a.steps) seq.push_back({Graphone::Kind::unit, step.source, step.label});
    seq.push_back(Graphone::end());
    out.push_back(std::move(seq));
  }
  return out;
}

std::size_t GraphoneLM::KeyHash::operator()(const std::vector<GraphoneId>& k) const noexcept {
  std::uint64_t x = 0xcbf29ce484222325ull;
  for (auto id : k) {
    x ^= id;
    x *= 0x100000001b3ull;
  }
  return static_cast<std::size_t>(x ^ (x >> 29));
}

std::optional<GraphoneId> GraphoneLM::id(const Graphone& g) const {
  auto it = ids_.find(g);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

GraphoneLM GraphoneLM::train(std::span<const GraphoneSequence> sequences, std::size_t n) {
  if (n < 1) throw ArgumentError("n-gram order must be >= 1");
  if (sequences.empty()) throw TrainingError("graphone LM: empty training set");
  GraphoneLM lm;
  lm.order_ = n;

  std::set<Graphone> units;
  for (const auto& seq : sequences)
    for (const auto& g : seq)
      if (g.kind == Graphone::Kind::unit) units.insert(g);
  lm.vocab_ = {Graphone::begin(), Graphone::end()};
  lm.vocab_.insert(lm.vocab_.end(), units.begin(), units.end());

  for (GraphoneId i = 0; i < lm.vocab_.size(); ++i) lm.ids_.emplace(lm.vocab_[i], i);

  std::vector<GraphoneId> ids;
  for (const auto& seq : sequences) {
    ids.clear();
    for (const auto& g : seq) ids.push_back(lm.ids_.at(g));
    for (std::size_t t = 1; t < ids.size(); ++t) {
      for (std::size_t m = 1; m <= n && m <= t + 1; ++m)
        ++lm.counts_[std::vector<GraphoneId>(ids.begin() + static_cast<std::ptrdiff_t>(t + 1 - m),
                                             ids.begin() + static_cast<std::ptrdiff_t>(t + 1))];
    }
  }
  lm.index();
  return lm;
}

void GraphoneLM::index() {
  contexts_.clear();
  by_symbol_.clear();
  label_freq_.clear();
  predicted_ = 0;
  for (const auto& [ngram, c] : counts_) {
    std::vector<GraphoneId> ctx(ngram.begin(), ngram.end() - 1);
    auto& stats = contexts_[ctx];
    stats.total += c;
    stats.distinct += 1;
    if (ngram.size() == 1) predicted_ += c;
  }
  std::uint64_t unit_total = 0;
  for (GraphoneId i = 2; i < vocab_.size(); ++i) {
    by_symbol_[vocab_[i].symbol].push_back(i);
    const auto c = count(std::span<const GraphoneId>(&i, 1));
    label_freq_[vocab_[i].label] += static_cast<double>(c);
    unit_total += c;
  }
  for (auto& [label, f] : label_freq_) f /= static_cast<double>(unit_total);
}

std::uint64_t GraphoneLM::count(std::span<const GraphoneId> ngram) const {
  auto it = counts_.find(std::vector<GraphoneId>(ngram.begin(), ngram.end()));
  return it == counts_.end() ? 0 : it->second;
}

double GraphoneLM::prob(std::span<const GraphoneId> context, GraphoneId next) const {
  if (context.size() + 1 > order_) context = context.subspan(context.size() + 1 - order_);
  // Interpolate from the unigram level upwards.
  std::vector<GraphoneId> key;
  const GraphoneId unigram[1] = {next};
  double p = static_cast<double>(count(unigram)) / static_cast<double>(predicted_);
  for (std::size_t len = 1; len <= context.size(); ++len) {
    key.assign(context.end() - static_cast<std::ptrdiff_t>(len), context.end());
    auto it = contexts_.find(key);
    if (it == contexts_.end()) continue;
    key.push_back(next);
    const double c = static_cast<double>(count(key));
    const double total = static_cast<double>(it->second.total);
    const double types = static_cast<double>(it->second.distinct);
    p = (c + types * p) / (total + types);
  }
  return p;
}

std::span<const GraphoneId> GraphoneLM::units_for(char32_t symbol) const {
  auto it = by_symbol_.find(symbol);
  if (it == by_symbol_.end()) return {};
  return it->second;
}

void GraphoneLM::write(std::ostream& out) const {
  out << kJointNgramMagic << '\t' << kJointNgramFormatVersion << '\n';
  out << "order\t" << order_ << '\n';
  out << "span_bound\t" << span_bound << '\n';
  out << "units\t" << vocab_.size() - 2 << '\n';
  for (std::size_t i = 2; i < vocab_.size(); ++i)
    out << utf8::encode(vocab_[i].symbol) << '\t' << utf8::encode(vocab_[i].label) << '\n';
  std::vector<std::pair<std::vector<GraphoneId>, std::uint64_t>> rows(counts_.begin(), counts_.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a.first < b.first;
  });
  out << "ngrams\t" << rows.size() << '\n';
  for (const auto& [ngram, c] : rows) {
    for (std::size_t i = 0; i < ngram.size(); ++i) out << (i ? "," : "") << ngram[i];
    out << '\t' << c << '\n';
  }
}

GraphoneLM GraphoneLM::read(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> const std::string& {
    if (!textio::read_line(in, line)) throw FormatError(line_no + 1, "unexpected end of LM file");
    ++line_no;
    return line;
  };
  auto field = [&](std::string_view key) {
    next();
    const auto tab = line.find('\t');
    if (tab == std::string::npos || std::string_view(line).substr(0, tab) != key)
      throw FormatError(line_no, "expected field '" + std::string(key) + "'");
    return textio::parse_size(std::string_view(line).substr(tab + 1), line_no);
  };

  if (!textio::read_line(in, line)) throw VersionError("empty LM file");
  ++line_no;
  {
    const auto f = textio::split(line, '\t');
    if (f.size() != 2 || f[0] != kJointNgramMagic)
      throw VersionError("not a joint n-gram model file (header '" + line + "')");
    if (f[1] != std::to_string(kJointNgramFormatVersion))
      throw VersionError("incompatible joint n-gram format version " + std::string(f[1]) +
                         " (supported: " + std::to_string(kJointNgramFormatVersion) + ")");
  }
  GraphoneLM lm;
  lm.order_ = field("order");
  if (lm.order_ < 1) throw FormatError(line_no, "order must be >= 1");
  lm.span_bound = field("span_bound");
  const auto nunits = field("units");
  lm.vocab_ = {Graphone::begin(), Graphone::end()};
  for (std::size_t i = 0; i < nunits; ++i) {
    next();
    const auto f = textio::split(line, '\t');
    auto sym = f.size() == 2 ? utf8::decode(f[0]) : std::nullopt;
    auto label = f.size() == 2 ? utf8::decode(f[1]) : std::nullopt;
    if (!sym || !label || sym->size() != 1) throw FormatError(line_no, "malformed graphone row");
    lm.vocab_.push_back({Graphone::Kind::unit, (*sym)[0], *label});
  }
  for (GraphoneId i = 0; i < lm.vocab_.size(); ++i) lm.ids_.emplace(lm.vocab_[i], i);
  if (lm.ids_.size() != lm.vocab_.size()) throw FormatError(line_no, "duplicate graphones");
  const auto nngrams = field("ngrams");
  for (std::size_t i = 0; i < nngrams; ++i) {
    next();
    const auto f = textio::split(line, '\t');
    if (f.size() != 2) throw FormatError(line_no, "malformed n-gram row");
    std::vector<GraphoneId> key;
    for (auto part : textio::split(f[0], ',')) {
      const auto id = textio::parse_size(part, line_no);
      if (id >= lm.vocab_.size()) throw FormatError(line_no, "graphone id out of range");
      key.push_back(static_cast<GraphoneId>(id));
    }
    if (key.empty() || key.size() > lm.order_) throw FormatError(line_no, "n-gram length out of range");
    lm.counts_[key] = textio::parse_size(f[1], line_no);
  }
  lm.index();
  if (lm.predicted_ == 0) throw FormatError(line_no, "LM has no unigram counts");
  return lm;
}

namespace {

struct Hypothesis {
  std::vector<GraphoneId> context;  // last n-1 units, most recent last
  std::vector<OutputLabel> labels;
  double score = 0.0;
};

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.labels < b.labels;
}

}  // namespace

BeamResult beam_search(const GraphoneLM& lm, const Symbols& source, std::size_t beam) {
  if (beam < 1) throw ArgumentError("beam must be >= 1");
  // Placeholder id for units outside the vocabulary; no n-gram contains it.
  const auto unknown = static_cast<GraphoneId>(lm.vocabulary().size());
  const std::size_t keep = lm.order() - 1;

  std::vector<Hypothesis> hyps(1);
  if (keep > 0) hyps[0].context = {GraphoneLM::kBegin};

  std::map<std::vector<GraphoneId>, Hypothesis> merged;
  for (char32_t symbol : source) {
    merged.clear();
    const auto units = lm.units_for(symbol);
    for (const auto& h : hyps) {
      auto extend = [&](GraphoneId unit, const OutputLabel& label, double logp) {
        Hypothesis next;
        next.score = h.score + logp;
        next.labels = h.labels;
        next.labels.push_back(label);
        next.context = h.context;
        if (keep > 0) {
          next.context.push_back(unit);
          if (next.context.size() > keep) next.context.erase(next.context.begin());
        }
        auto [it, fresh] = merged.try_emplace(next.context, next);
        if (!fresh && better(next, it->second)) it->second = std::move(next);
      };
      if (!units.empty()) {
        for (GraphoneId u : units)
          extend(u, lm.vocabulary()[u].label, std::log(lm.prob(h.context, u)));
      } else {
        for (const auto& [label, freq] : lm.label_frequencies()) extend(unknown, label, std::log(freq));
      }
    }
    hyps.clear();
    for (auto& [ctx, h] : merged) hyps.push_back(std::move(h));
    std::sort(hyps.begin(), hyps.end(), better);
    if (hyps.size() > beam) hyps.resize(beam);
  }
  for (auto& h : hyps) h.score += std::log(lm.prob(h.context, GraphoneLM::kEnd));
  const auto best = std::min_element(hyps.begin(), hyps.end(), better);

  BeamResult out;
  out.labels = best->labels;
  out.log_prob = best->score;
  for (const auto& l : out.labels) out.output += l;
  return out;
}

Symbols beam_decode(const GraphoneLM& lm, const Symbols& source, std::size_t beam) {
  return beam_search(lm, source, beam).output;
}

}  // namespace monoseq
