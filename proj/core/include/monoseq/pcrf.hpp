#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "monoseq/aligner.hpp"
#include "monoseq/features.hpp"
#include "monoseq/lattice.hpp"
#include "monoseq/weights.hpp"

namespace monoseq {

struct TrainConfig {
  std::vector<std::size_t> orders{1, 2, 3, 4, 5};  // strictly ascending, starting at 1
  double tau = 1e-4;
  std::size_t top_k = 12;
  std::size_t epochs = 10;
  double eta0 = 0.1;      // step size at epoch e is eta0 / (1 + e)
  double lambda = 1e-5;   // L2 strength per example
  std::uint64_t seed = 1;
  std::size_t batch_size = 1;
  std::size_t threads = 1;
  /// A missing (feature, label) observation weight is created once the label
  /// reaches this marginal at a position where the feature fires.
  double support_threshold = 0.01;

  /// {1, 2, ..., order}.
  static std::vector<std::size_t> schedule_up_to(std::size_t order);
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// The trained model: one weight table per order of the schedule, sharing a
/// single feature interning table and label alphabet.
struct ModelStack {
  FeatureConfig features;
  TrainConfig train;
  LabelAlphabet labels;
  FeatureTable table;
  std::vector<WeightTable> weights;  // weights[k] has order train.orders[k]
  std::size_t span_bound = 2;        // echo of the alignment model's span bound

  std::size_t final_order() const { return weights.back().order(); }
};

/// One training sequence after featurization.
struct CrfExample {
  PositionFeatures features;
  std::vector<LabelId> gold;
};

struct TrainReport {
  /// Mean regularized negative log-likelihood per epoch, one row per order.
  std::vector<std::vector<double>> epoch_objectives;
  std::vector<double> mean_lattice_size;  // average candidates per position, per order
};

/// Coarse-to-fine SGD training. For each order of the schedule the example
/// lattices are pruned with the previous order's marginals (gold labels
/// forced in), then the L2-regularized conditional log-likelihood is
/// maximized with seeded, shuffled stochastic gradient steps.
///
/// Observation weights start out as the (feature, label) pairs seen in the
/// gold data and grow with confusable labels (see support_threshold);
/// transition weights are created when first touched.
ModelStack sgd_train(std::span<const AlignedPair> aligned, const std::set<OutputLabel>& label_alphabet,
                     const TrainConfig& cfg, const FeatureConfig& fcfg, TrainReport* report = nullptr);

/// log p(gold | x) restricted to the lattice.
double log_likelihood(const WeightTable& weights, const CrfExample& example,
                      const PrunedLattice& lattice);

/// Analytic gradient of log p(gold | x) - lambda/2 * ||w||^2 over every weight
/// the example touches (observation weights: stored ones only).
std::map<WeightKey, double> gradient(const WeightTable& weights, const CrfExample& example,
                                     const PrunedLattice& lattice, double lambda = 0.0);

/// Max relative error between gradient() and central finite differences with
/// step `epsilon` over every touched weight; |a-n| / max(|a|, |n|, 1e-6).
double grad_check(const WeightTable& weights, const CrfExample& example,
                  const PrunedLattice& lattice, double epsilon, double lambda = 0.0);

/// Featurizes against a frozen table (unseen features map to kUnknownFeature).
PositionFeatures lookup_features(const Symbols& source, const FeatureConfig& cfg,
                                 const FeatureTable& table);

/// Runs the order cascade and returns the final order's lattice together with
/// its marginals.
std::pair<PrunedLattice, Marginals> cascade(const ModelStack& stack, const PositionFeatures& features);

/// Viterbi label ids at the final order over the cascaded lattice.
std::vector<LabelId> decode_labels(const ModelStack& stack, const Symbols& source);

/// Concatenation of the decoded labels (epsilon labels vanish).
Symbols decode(const ModelStack& stack, const Symbols& source);

void write_model(std::ostream& out, const ModelStack& stack);
ModelStack read_model(std::istream& in);

inline constexpr const char* kPcrfMagic = "monoseq-pcrf";
inline constexpr std::size_t kPcrfFormatVersion = 1;

}  // namespace monoseq
