#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "monoseq/weights.hpp"

namespace monoseq {

/// Per-position candidate labels, ascending by id.
struct PrunedLattice {
  std::vector<std::vector<LabelId>> candidates;

  std::size_t size() const noexcept { return candidates.size(); }
  static PrunedLattice full(std::size_t length, std::size_t alphabet_size);
};

using PositionFeatures = std::vector<std::vector<FeatureId>>;

/// The expanded state space of an order-k CRF over a pruned lattice. A state
/// after position i is the history of the last k labels (begin-padded);
/// each edge consumes one candidate label at one position.
///
/// Edges at position i are laid out from-state major, candidate minor, so the
/// edge for (from, c) is edges[i][from * candidates[i].size() + c].
struct LatticeGraph {
  struct Edge {
    std::uint32_t from;
    std::uint32_t cand;  // index into candidates[i]
    std::uint32_t to;
    double score;
  };

  std::size_t order = 1;
  std::vector<std::vector<LabelHistory>> states;  // states[0] = {begin}; states[i+1] after position i
  std::vector<std::vector<Edge>> edges;           // edges[i], i = 0..T-1
  /// Equal histories at different positions share one id: state_ids[i][s]
  /// indexes distinct_states for states[i][s].
  std::vector<std::vector<std::uint32_t>> state_ids;
  std::vector<LabelHistory> distinct_states;
};

/// Builds the graph and scores every edge as
///   sum_f w(f, (), y) + sum_{k=1..order} w(T, last k labels of the history, y).
/// Throws ContractError on an empty candidate set.
LatticeGraph build_graph(const WeightTable& weights, const PrunedLattice& lattice,
                         const PositionFeatures& features);

struct Marginals {
  double log_z = 0.0;           // forward pass
  double log_z_backward = 0.0;  // backward pass
  /// edge_probs[i][e] is the posterior of graph.edges[i][e]; summed over the
  /// from-states it gives the (history, label) marginals at position i.
  std::vector<std::vector<double>> edge_probs;
  /// label_probs[i][c] is the posterior of lattice.candidates[i][c].
  std::vector<std::vector<double>> label_probs;
};

/// Log-space forward-backward over the graph.
Marginals forward_backward(const LatticeGraph& graph, const PrunedLattice& lattice);
Marginals forward_backward(const WeightTable& weights, const PrunedLattice& lattice,
                           const PositionFeatures& features);

/// Exact best label sequence over the lattice; among equal scores the
/// lexicographically smallest id sequence wins.
std::vector<LabelId> viterbi(const LatticeGraph& graph, const PrunedLattice& lattice);

/// Score of one complete path; `labels` must be in the lattice.
double path_score(const LatticeGraph& graph, const PrunedLattice& lattice,
                  std::span<const LabelId> labels);

/// Keeps, per position, labels with marginal >= tau, capped at top_k by
/// marginal (ties by label id); always keeps the argmax, and the gold label
/// when given.
PrunedLattice prune(const PrunedLattice& lattice, const Marginals& marginals, double tau,
                    std::size_t top_k, std::span<const LabelId> gold = {});

}  // namespace monoseq
