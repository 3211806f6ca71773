#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monoseq/corpus.hpp"

namespace monoseq {

/// Exact-match word accuracy. Throws ArgumentError on a length mismatch or
/// on empty input.
double wac(std::span<const Symbols> predictions, std::span<const Symbols> references);

/// Source lengths in [lo, hi]; hi is empty for the open last bucket.
struct LengthBucket {
  std::size_t lo = 1;
  std::optional<std::size_t> hi;
  std::size_t count = 0;
  std::size_t correct = 0;

  /// Empty when the bucket has no samples.
  std::optional<double> wac() const;
};

inline const std::vector<std::size_t> kDefaultBucketEdges = {5, 10, 15, 20};

/// Edges e1 < e2 < ... give buckets [1, e1-1], [e1, e2-1], ..., [ek, inf).
/// Throws ArgumentError if edges are not strictly ascending and > 1.
std::vector<LengthBucket> wac_by_length(std::span<const StringPair> pairs,
                                        std::span<const Symbols> predictions,
                                        std::span<const std::size_t> edges = kDefaultBucketEdges);

struct EvalReport {
  std::size_t count = 0;
  std::size_t correct = 0;
  double wac = 0.0;
  std::vector<LengthBucket> buckets;
  // Echoed verbatim into the table, in this order.
  std::vector<std::pair<std::string, std::string>> config;
  // Wall-clock seconds; shown in the table only when set, never in the CSV.
  std::optional<double> train_seconds;
  std::optional<double> decode_seconds;
};

EvalReport evaluate(std::span<const StringPair> pairs, std::span<const Symbols> predictions,
                    std::span<const std::size_t> edges = kDefaultBucketEdges);

/// "74.87%" for 0.7487.
std::string format_percent(double fraction);

/// Human-readable table.
void write_table(std::ostream& out, const EvalReport& report);

/// Header "bucket_lo,bucket_hi,count,wac", one row per bucket, then the
/// "all,all" totals row. Empty buckets have wac "NA"; the open bound is "inf".
void write_csv(std::ostream& out, const EvalReport& report);

/// Writes both; throws IoError if either stream fails.
void report_emit(const EvalReport& report, std::ostream& table, std::ostream& csv);

}  // namespace monoseq
