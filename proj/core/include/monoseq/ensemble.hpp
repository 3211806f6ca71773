#pragma once

#include <functional>
#include <map>
#include <span>

#include "monoseq/pcrf.hpp"

namespace monoseq {

using LabelDistribution = std::map<OutputLabel, double>;

/// Normalized geometric mean: p(y) = (1/Z) * prod_i p_i(y)^(1/k).
/// All inputs must share the same support; throws ArgumentError otherwise.
LabelDistribution ensemble_combine(std::span<const LabelDistribution> distributions);

/// Posterior decoding with k independently trained stacks. Each stack runs its
/// own cascade; the final-order marginals of every stack are then recomputed
/// on the per-position union of the stacks' lattices, combined with
/// ensemble_combine, and the most probable label is taken at each position
/// (ties: smallest label).
Symbols ensemble_decode(std::span<const std::reference_wrapper<const ModelStack>> stacks,
                        const Symbols& source);

}  // namespace monoseq
