#include "monoseq/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "monoseq/errors.hpp"
#include "monoseq/logmath.hpp"

namespace monoseq {

LabelDistribution ensemble_combine(std::span<const LabelDistribution> distributions) {
  if (distributions.empty()) throw ArgumentError("ensemble_combine: no distributions");
  const auto& first = distributions.front();
  for (const auto& d : distributions) {
    if (d.size() != first.size() ||
        !std::equal(d.begin(), d.end(), first.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; }))
      throw ArgumentError("ensemble_combine: distributions have different supports");
  }
  const double k = static_cast<double>(distributions.size());
  // Geometric mean in log space; labels are visited in the same order in every map.
  std::vector<double> logs;
  logs.reserve(first.size());
  for (const auto& [label, p0] : first) {
    double acc = 0.0;
    for (const auto& d : distributions) acc += std::log(d.at(label)) / k;
    logs.push_back(acc);
  }
  const double log_z = log_sum_exp(logs);
  if (log_z == kNegInf) throw ArgumentError("ensemble_combine: distributions share no mass");
  LabelDistribution out;
  std::size_t i = 0;
  for (const auto& [label, p0] : first) out.emplace(label, std::exp(logs[i++] - log_z));
  return out;
}

Symbols ensemble_decode(std::span<const std::reference_wrapper<const ModelStack>> stacks,
                        const Symbols& source) {
  if (stacks.empty()) throw ArgumentError("ensemble_decode: no models");
  if (source.empty()) return {};
  const auto& labels = stacks.front().get().labels;
  for (const auto& s : stacks)
    if (!(s.get().labels == labels))
      throw ArgumentError("ensemble_decode: models were trained with different label alphabets");

  std::vector<PositionFeatures> features;
  std::vector<std::set<LabelId>> merged(source.size());
  for (const auto& s : stacks) {
    features.push_back(lookup_features(source, s.get().features, s.get().table));
    const auto [lattice, marg] = cascade(s.get(), features.back());
    for (std::size_t i = 0; i < source.size(); ++i)
      merged[i].insert(lattice.candidates[i].begin(), lattice.candidates[i].end());
  }
  PrunedLattice union_lattice;
  for (const auto& m : merged) union_lattice.candidates.emplace_back(m.begin(), m.end());

  std::vector<Marginals> per_model;
  for (std::size_t k = 0; k < stacks.size(); ++k)
    per_model.push_back(forward_backward(stacks[k].get().weights.back(), union_lattice, features[k]));

  Symbols out;
  for (std::size_t i = 0; i < source.size(); ++i) {
    std::vector<LabelDistribution> dists(stacks.size());
    for (std::size_t k = 0; k < stacks.size(); ++k)
      for (std::size_t c = 0; c < union_lattice.candidates[i].size(); ++c)
        dists[k][labels.label(union_lattice.candidates[i][c])] = per_model[k].label_probs[i][c];
    const auto combined = ensemble_combine(dists);
    // Map order is label order, so the first maximum is the smallest label.
    auto best = combined.begin();
    for (auto it = combined.begin(); it != combined.end(); ++it)
      if (it->second > best->second) best = it;
    out += best->first;
  }
  return out;
}

}  // namespace monoseq
