#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <utility>
#include <vector>

#include "monoseq/utf8.hpp"

namespace monoseq {

/// Reserved padding symbol used by the feature window. Never valid corpus data.
inline constexpr char32_t kBoundarySymbol = U'\u0002';

/// One supervised example. The source is non-empty; the target may be empty.
struct StringPair {
  Symbols source;
  Symbols target;

  friend bool operator==(const StringPair&, const StringPair&) = default;
};

/// Immutable, ordered collection of pairs plus the alphabets they induce.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<StringPair> pairs);

  const std::vector<StringPair>& pairs() const noexcept { return pairs_; }
  const std::set<char32_t>& source_alphabet() const noexcept { return source_alphabet_; }
  const std::set<char32_t>& target_alphabet() const noexcept { return target_alphabet_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const StringPair& operator[](std::size_t i) const { return pairs_[i]; }

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<StringPair> pairs_;
  std::set<char32_t> source_alphabet_;
  std::set<char32_t> target_alphabet_;
};

struct LoadReport {
  std::size_t lines_read = 0;
  std::size_t skipped = 0;
  std::vector<std::size_t> skipped_lines;  // 1-based
};

/// Reads "source<TAB>target" lines. In strict mode a malformed line throws
/// FormatError; otherwise it is skipped and counted in `report`. Malformed
/// UTF-8 always throws DecodeError. A trailing CR per line is dropped.
Corpus load_pairs(std::istream& in, bool strict = true, LoadReport* report = nullptr);

/// Writes the corpus back as TSV, one pair per line, LF terminated.
void write_pairs(std::ostream& out, const Corpus& corpus);

struct SplitSpec {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::uint64_t seed = 0;
};

/// Seeded Fisher-Yates over pair indices (see Rng), then train takes the first
/// train_size indices and test the next test_size.
std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec);

}  // namespace monoseq
