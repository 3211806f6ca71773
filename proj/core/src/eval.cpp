#include "monoseq/eval.hpp"

#include <cstdio>
#include <ostream>

#include "monoseq/errors.hpp"
#include "monoseq/textio.hpp"

namespace monoseq {

double wac(std::span<const Symbols> predictions, std::span<const Symbols> references) {
  if (predictions.size() != references.size())
    throw ArgumentError("wac: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(references.size()) + " references");
  if (references.empty()) throw ArgumentError("wac: no references");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < references.size(); ++i) correct += predictions[i] == references[i];
  return static_cast<double>(correct) / static_cast<double>(references.size());
}

std::optional<double> LengthBucket::wac() const {
  if (count == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(count);
}

std::vector<LengthBucket> wac_by_length(std::span<const StringPair> pairs,
                                        std::span<const Symbols> predictions,
                                        std::span<const std::size_t> edges) {
  if (pairs.size() != predictions.size())
    throw ArgumentError("wac_by_length: predictions and pairs differ in length");
  std::vector<LengthBucket> buckets;
  std::size_t lo = 1;
  for (std::size_t e : edges) {
    if (e <= lo) throw ArgumentError("bucket edges must be ascending and greater than 1");
    buckets.push_back({lo, e - 1});
    lo = e;
  }
  buckets.push_back({lo, std::nullopt});

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto len = pairs[i].source.size();
    std::size_t b = 0;
    while (b + 1 < buckets.size() && len > *buckets[b].hi) ++b;
    ++buckets[b].count;
    buckets[b].correct += predictions[i] == pairs[i].target;
  }
  return buckets;
}

EvalReport evaluate(std::span<const StringPair> pairs, std::span<const Symbols> predictions,
                    std::span<const std::size_t> edges) {
  EvalReport r;
  r.buckets = wac_by_length(pairs, predictions, edges);
  for (const auto& b : r.buckets) {
    r.count += b.count;
    r.correct += b.correct;
  }
  r.wac = r.count ? static_cast<double>(r.correct) / static_cast<double>(r.count) : 0.0;
  return r;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", fraction * 100.0);
  return buf;
}

namespace {

std::string bound(const std::optional<std::size_t>& hi) { return hi ? std::to_string(*hi) : "inf"; }

}  // namespace

void write_table(std::ostream& out, const EvalReport& report) {
  for (const auto& [k, v] : report.config) out << k << ": " << v << '\n';
  out << "WAC: " << format_percent(report.wac) << " (" << report.correct << '/' << report.count << ")\n";
  if (report.train_seconds) out << "train_seconds: " << textio::format_double(*report.train_seconds) << '\n';
  if (report.decode_seconds) out << "decode_seconds: " << textio::format_double(*report.decode_seconds) << '\n';
  out << "length    count   WAC\n";
  for (const auto& b : report.buckets) {
    char buf[64];
    const std::string range = std::to_string(b.lo) + (b.hi ? "-" + std::to_string(*b.hi) : "+");
    const auto w = b.wac();
    std::snprintf(buf, sizeof buf, "%-9s %6zu   %s\n", range.c_str(), b.count,
                  w ? format_percent(*w).c_str() : "NA");
    out << buf;
  }
}

void write_csv(std::ostream& out, const EvalReport& report) {
  out << "bucket_lo,bucket_hi,count,wac\n";
  for (const auto& b : report.buckets) {
    const auto w = b.wac();
    out << b.lo << ',' << bound(b.hi) << ',' << b.count << ',' << (w ? textio::format_double(*w) : "NA")
        << '\n';
  }
  out << "all,all," << report.count << ',' << textio::format_double(report.wac) << '\n';
}

void report_emit(const EvalReport& report, std::ostream& table, std::ostream& csv) {
  write_table(table, report);
  write_csv(csv, report);
  table.flush();
  csv.flush();
  if (!table || !csv) throw IoError("failed to write evaluation report");
}

}  // namespace monoseq
