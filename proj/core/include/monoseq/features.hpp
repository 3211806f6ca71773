#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "monoseq/corpus.hpp"

namespace monoseq {

/// Window of `window` symbols on each side of the tagged position (2w+1 in
/// total), from which every contiguous m-gram with 1 <= m <= max_mgram is drawn.
struct FeatureConfig {
  std::size_t window = 4;
  std::size_t max_mgram = 4;
  char32_t boundary = kBoundarySymbol;

  /// Throws ArgumentError unless 1 <= max_mgram <= 2*window+1.
  void validate() const;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Feature strings for position p, formatted "off=<o>:len=<m>:<symbols>"
/// where o is the m-gram's start offset relative to p. The source is padded
/// with `window` boundary symbols on each side, so every position yields
/// exactly sum_{m=1..N} (2w+2-m) strings. Throws ArgumentError if p is out of range.
std::vector<std::string> extract(const Symbols& source, std::size_t p, const FeatureConfig& cfg);

using FeatureId = std::uint32_t;
inline constexpr FeatureId kUnknownFeature = 0xFFFFFFFFu;

/// Dense interning of feature strings. Ids are assigned 0, 1, 2, ... in
/// first-seen order while growing; once frozen, unseen strings map to
/// kUnknownFeature and the table never changes.
class FeatureTable {
 public:
  FeatureId intern(std::string_view feature);
  std::vector<FeatureId> intern(std::span<const std::string> features);
  FeatureId lookup(std::string_view feature) const;

  void freeze() noexcept { frozen_ = true; }
  bool frozen() const noexcept { return frozen_; }
  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(FeatureId id) const { return names_.at(id); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, FeatureId, Hash, std::equal_to<>> ids_;
  std::vector<std::string> names_;
  bool frozen_ = false;
};

/// Interned feature ids for every position of a source string.
std::vector<std::vector<FeatureId>> featurize(const Symbols& source, const FeatureConfig& cfg,
                                              FeatureTable& table);

}  // namespace monoseq
