#include "monoseq/features.hpp"

#include "monoseq/errors.hpp"

namespace monoseq {

void FeatureConfig::validate() const {
  if (max_mgram < 1 || max_mgram > 2 * window + 1)
    throw ArgumentError("feature config: need 1 <= max_mgram <= 2*window+1 (window=" +
                        std::to_string(window) + ", max_mgram=" + std::to_string(max_mgram) + ")");
}

std::vector<std::string> extract(const Symbols& source, std::size_t p, const FeatureConfig& cfg) {
  if (p >= source.size())
    throw ArgumentError("extract: position " + std::to_string(p) + " out of range for length " +
                        std::to_string(source.size()));
  cfg.validate();
  const auto w = static_cast<std::ptrdiff_t>(cfg.window);
  const auto n = static_cast<std::ptrdiff_t>(source.size());
  const auto pos = static_cast<std::ptrdiff_t>(p);
  auto symbol_at = [&](std::ptrdiff_t i) { return (i < 0 || i >= n) ? cfg.boundary : source[i]; };

  std::vector<std::string> out;
  out.reserve(cfg.max_mgram * (2 * cfg.window + 1));
  for (std::ptrdiff_t m = 1; m <= static_cast<std::ptrdiff_t>(cfg.max_mgram); ++m) {
    for (std::ptrdiff_t off = -w; off + m - 1 <= w; ++off) {
      Symbols gram;
      for (std::ptrdiff_t k = 0; k < m; ++k) gram.push_back(symbol_at(pos + off + k));
      out.push_back("off=" + std::to_string(off) + ":len=" + std::to_string(m) + ":" +
                    utf8::encode(gram));
    }
  }
  return out;
}

FeatureId FeatureTable::intern(std::string_view feature) {
  if (auto it = ids_.find(feature); it != ids_.end()) return it->second;
  if (frozen_) return kUnknownFeature;
  const auto id = static_cast<FeatureId>(names_.size());
  names_.emplace_back(feature);
  ids_.emplace(names_.back(), id);
  return id;
}

std::vector<FeatureId> FeatureTable::intern(std::span<const std::string> features) {
  std::vector<FeatureId> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(intern(f));
  return out;
}

FeatureId FeatureTable::lookup(std::string_view feature) const {
  auto it = ids_.find(feature);
  return it == ids_.end() ? kUnknownFeature : it->second;
}

std::vector<std::vector<FeatureId>> featurize(const Symbols& source, const FeatureConfig& cfg,
                                              FeatureTable& table) {
  std::vector<std::vector<FeatureId>> out(source.size());
  for (std::size_t p = 0; p < source.size(); ++p) out[p] = table.intern(extract(source, p, cfg));
  return out;
}

}  // namespace monoseq
