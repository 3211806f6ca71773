#include "monoseq/corpus.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "monoseq/errors.hpp"
#include "monoseq/rng.hpp"

namespace monoseq {

Corpus::Corpus(std::vector<StringPair> pairs) : pairs_(std::move(pairs)) {
  for (const auto& p : pairs_) {
    source_alphabet_.insert(p.source.begin(), p.source.end());
    target_alphabet_.insert(p.target.begin(), p.target.end());
  }
}

namespace {

// Returns an empty string on success, otherwise the reason the line is invalid.
std::string parse_line(const Symbols& line, StringPair& out) {
  const auto tabs = std::count(line.begin(), line.end(), U'\t');
  if (tabs != 1) return "expected exactly one TAB, found " + std::to_string(tabs);
  const auto tab = line.find(U'\t');
  out.source = line.substr(0, tab);
  out.target = line.substr(tab + 1);
  if (out.source.empty()) return "empty source";
  if (out.source.find(kBoundarySymbol) != Symbols::npos ||
      out.target.find(kBoundarySymbol) != Symbols::npos)
    return "reserved symbol U+0002 in data";
  return {};
}

}  // namespace

Corpus load_pairs(std::istream& in, bool strict, LoadReport* report) {
  LoadReport local;
  std::vector<StringPair> pairs;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    auto decoded = utf8::decode(raw);
    if (!decoded) throw DecodeError(line_no, "malformed UTF-8");
    StringPair pair;
    if (auto why = parse_line(*decoded, pair); !why.empty()) {
      if (strict) throw FormatError(line_no, why);
      ++local.skipped;
      local.skipped_lines.push_back(line_no);
      continue;
    }
    pairs.push_back(std::move(pair));
  }
  local.lines_read = line_no;
  if (report) *report = std::move(local);
  return Corpus(std::move(pairs));
}

void write_pairs(std::ostream& out, const Corpus& corpus) {
  for (const auto& p : corpus.pairs()) {
    out << utf8::encode(p.source) << '\t' << utf8::encode(p.target) << '\n';
  }
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec) {
  if (spec.train_size + spec.test_size > corpus.size()) {
    throw ArgumentError("split sizes " + std::to_string(spec.train_size) + "+" +
                        std::to_string(spec.test_size) + " exceed corpus size " +
                        std::to_string(corpus.size()));
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<StringPair> train;
  std::vector<StringPair> test;
  train.reserve(spec.train_size);
  test.reserve(spec.test_size);
  for (std::size_t i = 0; i < spec.train_size; ++i) train.push_back(corpus[order[i]]);
  for (std::size_t i = 0; i < spec.test_size; ++i)
    test.push_back(corpus[order[spec.train_size + i]]);
  return {Corpus(std::move(train)), Corpus(std::move(test))};
}

}  // namespace monoseq
