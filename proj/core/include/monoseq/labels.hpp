#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "monoseq/aligner.hpp"

namespace monoseq {

using LabelId = std::uint16_t;

/// Reserved label padding histories before the first position.
inline constexpr LabelId kBeginLabel = 0xFFFF;
inline constexpr std::size_t kMaxOrder = 7;

/// Up to kMaxOrder previous labels, most recent last.
class LabelHistory {
 public:
  LabelHistory() = default;

  /// A history of `order` begin labels.
  static LabelHistory begin(std::size_t order);
  static LabelHistory of(std::initializer_list<LabelId> ids);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  LabelId operator[](std::size_t i) const { return ids_[i]; }
  LabelId back() const { return ids_[size_ - 1]; }

  /// Same length: drops the oldest label and appends `next`.
  LabelHistory shifted(LabelId next) const;
  /// The most recent k labels.
  LabelHistory suffix(std::size_t k) const;
  void push_back(LabelId id);

  friend bool operator==(const LabelHistory& a, const LabelHistory& b) noexcept {
    if (a.size_ != b.size_) return false;
    for (std::size_t i = 0; i < a.size_; ++i)
      if (a.ids_[i] != b.ids_[i]) return false;
    return true;
  }
  friend std::strong_ordering operator<=>(const LabelHistory& a, const LabelHistory& b) noexcept;

 private:
  std::array<LabelId, kMaxOrder> ids_{};
  std::uint8_t size_ = 0;
};

struct LabelHistoryHash {
  std::size_t operator()(const LabelHistory& h) const noexcept {
    std::uint64_t x = 0x9E3779B97F4A7C15ull ^ h.size();
    for (std::size_t i = 0; i < h.size(); ++i) {
      x ^= h[i] + 0x9E3779B97F4A7C15ull + (x << 6) + (x >> 2);
    }
    return static_cast<std::size_t>(x);
  }
};

/// Label alphabet sorted lexicographically by scalar values, so that id order
/// equals label order (epsilon, when present, is id 0).
class LabelAlphabet {
 public:
  LabelAlphabet() = default;
  explicit LabelAlphabet(const std::set<OutputLabel>& labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const OutputLabel& label(LabelId id) const { return labels_.at(id); }
  std::optional<LabelId> id(const OutputLabel& label) const;
  const std::vector<OutputLabel>& labels() const noexcept { return labels_; }

  friend bool operator==(const LabelAlphabet&, const LabelAlphabet&) = default;

 private:
  std::vector<OutputLabel> labels_;
};

}  // namespace monoseq
