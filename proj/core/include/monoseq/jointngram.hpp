#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "monoseq/aligner.hpp"

namespace monoseq {

/// Joint unit: one source symbol with its aligned output label, or one of the
/// sequence sentinels.
struct Graphone {
  enum class Kind : std::uint8_t { begin = 0, end = 1, unit = 2 };
  Kind kind = Kind::unit;
  char32_t symbol = 0;
  OutputLabel label;

  static Graphone begin() { return {Kind::begin, 0, {}}; }
  static Graphone end() { return {Kind::end, 0, {}}; }

  friend bool operator==(const Graphone&, const Graphone&) = default;
  friend auto operator<=>(const Graphone&, const Graphone&) = default;
};

using GraphoneSequence = std::vector<Graphone>;

/// <s> (symbol, label)... </s>, one unit per aligned step (epsilon steps kept).
std::vector<GraphoneSequence> build_graphones(std::span<const AlignedPair> aligned);

using GraphoneId = std::uint32_t;

/// Count-based n-gram model over graphones with interpolated Witten-Bell
/// smoothing:
///   p(w | h) = (c(h w) + T(h) p(w | h')) / (c(h) + T(h))
/// where h' drops the oldest unit of h and T(h) is the number of distinct
/// units seen after h. Unseen contexts back off entirely; the unigram level is
/// the plain relative frequency of predicted units (</s> included, <s> never).
class GraphoneLM {
 public:
  static constexpr GraphoneId kBegin = 0;
  static constexpr GraphoneId kEnd = 1;

  /// Throws TrainingError on an empty training set, ArgumentError if n < 1.
  static GraphoneLM train(std::span<const GraphoneSequence> sequences, std::size_t n);

  std::size_t order() const noexcept { return order_; }
  std::size_t span_bound = 2;

  /// ids 0 and 1 are <s> and </s>; units follow in sorted order.
  const std::vector<Graphone>& vocabulary() const noexcept { return vocab_; }
  std::optional<GraphoneId> id(const Graphone& g) const;

  /// Context is most-recent-last; only its last n-1 units are used.
  double prob(std::span<const GraphoneId> context, GraphoneId next) const;

  /// Count of an n-gram (1 <= length <= n), 0 if unseen.
  std::uint64_t count(std::span<const GraphoneId> ngram) const;

  /// Unit ids whose source symbol is `symbol`, in vocabulary order.
  std::span<const GraphoneId> units_for(char32_t symbol) const;

  /// Relative frequency of each label over all units, for unseen symbols.
  const std::map<OutputLabel, double>& label_frequencies() const noexcept { return label_freq_; }

  void write(std::ostream& out) const;
  static GraphoneLM read(std::istream& in);

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<GraphoneId>& k) const noexcept;
  };
  struct ContextStats {
    std::uint64_t total = 0;
    std::uint64_t distinct = 0;
  };

  void index();

  std::size_t order_ = 1;
  std::vector<Graphone> vocab_;
  std::map<Graphone, GraphoneId> ids_;
  std::unordered_map<std::vector<GraphoneId>, std::uint64_t, KeyHash> counts_;
  std::unordered_map<std::vector<GraphoneId>, ContextStats, KeyHash> contexts_;
  std::map<char32_t, std::vector<GraphoneId>> by_symbol_;
  std::map<OutputLabel, double> label_freq_;
  std::uint64_t predicted_ = 0;
};

/// Left-to-right beam search. Each hypothesis extends with every unit whose
/// symbol matches the current source symbol (an unseen symbol extends with
/// every known label, scored by the label's overall frequency); hypotheses
/// with the same LM context are merged; the best `beam` survive by score, then
/// lexicographic label sequence. Finishes with </s>.
struct BeamResult {
  Symbols output;
  std::vector<OutputLabel> labels;
  double log_prob = 0.0;
};

BeamResult beam_search(const GraphoneLM& lm, const Symbols& source, std::size_t beam);
Symbols beam_decode(const GraphoneLM& lm, const Symbols& source, std::size_t beam);

inline constexpr const char* kJointNgramMagic = "monoseq-jointngram";
inline constexpr std::size_t kJointNgramFormatVersion = 1;

}  // namespace monoseq
