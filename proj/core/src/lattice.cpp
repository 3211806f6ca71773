#include "monoseq/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "monoseq/errors.hpp"
#include "monoseq/logmath.hpp"

namespace monoseq {

PrunedLattice PrunedLattice::full(std::size_t length, std::size_t alphabet_size) {
  PrunedLattice lat;
  std::vector<LabelId> all(alphabet_size);
  std::iota(all.begin(), all.end(), LabelId{0});
  lat.candidates.assign(length, all);
  return lat;
}

namespace {

// Weight of the full-length history per (global state, label), filled lazily.
class TransitionCache {
 public:
  TransitionCache(const WeightTable& weights, std::size_t alphabet)
      : weights_(weights), alphabet_(alphabet) {}

  std::uint32_t state_id(const LabelHistory& h) {
    auto [it, fresh] = ids_.try_emplace(h, static_cast<std::uint32_t>(states_.size()));
    if (fresh) {
      states_.push_back(h);
      cache_.resize(states_.size() * alphabet_, kUnset);
    }
    return it->second;
  }

  double score(std::uint32_t state, LabelId label) {
    double& slot = cache_[state * alphabet_ + label];
    if (std::isnan(slot)) slot = weights_.transition(states_[state], label);
    return slot;
  }

  std::vector<LabelHistory> release() { return std::move(states_); }

 private:
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
  const WeightTable& weights_;
  std::size_t alphabet_;
  std::unordered_map<LabelHistory, std::uint32_t, LabelHistoryHash> ids_;
  std::vector<LabelHistory> states_;
  std::vector<double> cache_;
};

// Weights of the shorter histories ending an edge depend only on the state
// the edge reaches: its last label and the order-1 labels before it.
double shorter_histories(const WeightTable& weights, const LabelHistory& to) {
  LabelHistory tail;
  for (std::size_t j = 0; j + 1 < to.size(); ++j) tail.push_back(to[j]);
  double s = 0.0;
  for (std::size_t k = 1; k < to.size(); ++k) s += weights.transition(tail.suffix(k), to.back());
  return s;
}

}  // namespace

LatticeGraph build_graph(const WeightTable& weights, const PrunedLattice& lattice,
                         const PositionFeatures& features) {
  const std::size_t T = lattice.size();
  if (features.size() != T)
    throw ContractError("build_graph: features and lattice lengths differ");
  std::size_t alphabet = 0;
  for (std::size_t i = 0; i < T; ++i) {
    if (lattice.candidates[i].empty())
      throw ContractError("empty candidate set at position " + std::to_string(i));
    alphabet = std::max<std::size_t>(alphabet, lattice.candidates[i].back() + 1u);
  }

  LatticeGraph g;
  g.order = weights.order();
  g.states.resize(T + 1);
  g.edges.resize(T);
  g.states[0].push_back(LabelHistory::begin(g.order));

  TransitionCache trans(weights, alphabet);
  g.state_ids.resize(T + 1);
  g.state_ids[0] = {trans.state_id(g.states[0][0])};
  std::vector<double> lower;
  std::vector<int> cand_index(alphabet, -1);
  std::vector<double> obs;
  const double scale = weights.scale();

  for (std::size_t i = 0; i < T; ++i) {
    const auto& cands = lattice.candidates[i];
    const std::size_t nc = cands.size();
    for (std::size_t c = 0; c < nc; ++c) cand_index[cands[c]] = static_cast<int>(c);
    obs.assign(nc, 0.0);
    for (FeatureId f : features[i]) {
      const auto* row = weights.observation_row(f);
      if (!row) continue;
      for (const auto& e : *row)
        if (e.label < alphabet && cand_index[e.label] >= 0) obs[cand_index[e.label]] += e.raw;
    }
    for (auto& v : obs) v *= scale;
    for (LabelId y : cands) cand_index[y] = -1;

    const auto& from = g.states[i];
    auto& next = g.states[i + 1];
    // States sharing the last order-1 labels reach the same successor per label.
    std::unordered_map<LabelHistory, std::uint32_t, LabelHistoryHash> tail_ids;
    std::vector<std::uint32_t> tail_of(from.size());
    for (std::size_t f = 0; f < from.size(); ++f) {
      auto [it, fresh] = tail_ids.try_emplace(from[f].suffix(g.order - 1),
                                              static_cast<std::uint32_t>(tail_ids.size()));
      tail_of[f] = it->second;
    }
    std::vector<std::int64_t> successor(tail_ids.size() * nc, -1);
    const auto& from_ids = g.state_ids[i];
    auto& next_ids = g.state_ids[i + 1];
    lower.clear();

    auto& edges = g.edges[i];
    edges.reserve(from.size() * nc);
    for (std::size_t f = 0; f < from.size(); ++f) {
      for (std::size_t c = 0; c < nc; ++c) {
        auto& to = successor[tail_of[f] * nc + c];
        if (to < 0) {
          to = static_cast<std::int64_t>(next.size());
          next.push_back(from[f].shifted(cands[c]));
          next_ids.push_back(trans.state_id(next.back()));
          lower.push_back(shorter_histories(weights, next.back()));
        }
        edges.push_back({static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(c),
                         static_cast<std::uint32_t>(to),
                         obs[c] + (lower[to] + trans.score(from_ids[f], cands[c]))});
      }
    }
  }
  g.distinct_states = trans.release();
  return g;
}

Marginals forward_backward(const LatticeGraph& g, const PrunedLattice& lattice) {
  const std::size_t T = g.edges.size();
  Marginals m;
  m.edge_probs.resize(T);
  m.label_probs.resize(T);
  if (T == 0) return m;

  std::vector<std::vector<double>> alpha(T + 1), beta(T + 1);
  alpha[0] = {0.0};
  std::vector<double> hi, sum;
  for (std::size_t i = 0; i < T; ++i) {
    const std::size_t n = g.states[i + 1].size();
    hi.assign(n, kNegInf);
    sum.assign(n, 0.0);
    for (const auto& e : g.edges[i]) hi[e.to] = std::max(hi[e.to], alpha[i][e.from] + e.score);
    for (const auto& e : g.edges[i]) sum[e.to] += std::exp(alpha[i][e.from] + e.score - hi[e.to]);
    alpha[i + 1].resize(n);
    for (std::size_t k = 0; k < n; ++k) alpha[i + 1][k] = hi[k] + std::log(sum[k]);
  }
  m.log_z = log_sum_exp(alpha[T]);

  beta[T].assign(g.states[T].size(), 0.0);
  for (std::size_t i = T; i-- > 0;) {
    const std::size_t n = g.states[i].size();
    hi.assign(n, kNegInf);
    sum.assign(n, 0.0);
    for (const auto& e : g.edges[i]) hi[e.from] = std::max(hi[e.from], beta[i + 1][e.to] + e.score);
    for (const auto& e : g.edges[i]) sum[e.from] += std::exp(beta[i + 1][e.to] + e.score - hi[e.from]);
    beta[i].resize(n);
    for (std::size_t k = 0; k < n; ++k) beta[i][k] = hi[k] + std::log(sum[k]);
  }
  m.log_z_backward = beta[0][0];

  for (std::size_t i = 0; i < T; ++i) {
    auto& ep = m.edge_probs[i];
    auto& lp = m.label_probs[i];
    ep.resize(g.edges[i].size());
    lp.assign(lattice.candidates[i].size(), 0.0);
    for (std::size_t k = 0; k < g.edges[i].size(); ++k) {
      const auto& e = g.edges[i][k];
      ep[k] = std::exp(alpha[i][e.from] + e.score + beta[i + 1][e.to] - m.log_z);
      lp[e.cand] += ep[k];
    }
  }
  return m;
}

Marginals forward_backward(const WeightTable& weights, const PrunedLattice& lattice,
                           const PositionFeatures& features) {
  return forward_backward(build_graph(weights, lattice, features), lattice);
}

std::vector<LabelId> viterbi(const LatticeGraph& g, const PrunedLattice& lattice) {
  const std::size_t T = g.edges.size();
  std::vector<std::vector<double>> best(T + 1);
  best[T].assign(g.states[T].size(), 0.0);
  for (std::size_t i = T; i-- > 0;) {
    best[i].assign(g.states[i].size(), kNegInf);
    for (const auto& e : g.edges[i])
      best[i][e.from] = std::max(best[i][e.from], e.score + best[i + 1][e.to]);
  }
  std::vector<LabelId> out;
  out.reserve(T);
  std::uint32_t cur = 0;
  for (std::size_t i = 0; i < T; ++i) {
    const std::size_t nc = lattice.candidates[i].size();
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& e = g.edges[i][cur * nc + c];
      if (e.score + best[i + 1][e.to] == best[i][cur]) {
        out.push_back(lattice.candidates[i][c]);
        cur = e.to;
        break;
      }
    }
  }
  return out;
}

double path_score(const LatticeGraph& g, const PrunedLattice& lattice,
                  std::span<const LabelId> labels) {
  if (labels.size() != g.edges.size()) throw ContractError("path_score: length mismatch");
  double total = 0.0;
  std::uint32_t cur = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& cands = lattice.candidates[i];
    auto it = std::lower_bound(cands.begin(), cands.end(), labels[i]);
    if (it == cands.end() || *it != labels[i])
      throw ContractError("path_score: label not in lattice at position " + std::to_string(i));
    const auto& e = g.edges[i][cur * cands.size() + static_cast<std::size_t>(it - cands.begin())];
    total += e.score;
    cur = e.to;
  }
  return total;
}

PrunedLattice prune(const PrunedLattice& lattice, const Marginals& marginals, double tau,
                    std::size_t top_k, std::span<const LabelId> gold) {
  if (top_k < 1) throw ArgumentError("prune: top_k must be >= 1");
  PrunedLattice out;
  out.candidates.resize(lattice.size());
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const auto& cands = lattice.candidates[i];
    const auto& probs = marginals.label_probs.at(i);
    order.resize(cands.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (probs[a] != probs[b]) return probs[a] > probs[b];
      return cands[a] < cands[b];
    });
    auto& keep = out.candidates[i];
    for (std::size_t r = 0; r < order.size() && keep.size() < top_k; ++r) {
      if (r > 0 && probs[order[r]] < tau) break;
      keep.push_back(cands[order[r]]);
    }
    if (i < gold.size() && std::find(keep.begin(), keep.end(), gold[i]) == keep.end())
      keep.push_back(gold[i]);
    std::sort(keep.begin(), keep.end());
  }
  return out;
}

}  // namespace monoseq
