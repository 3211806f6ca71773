#pragma once

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <vector>

#include "monoseq/features.hpp"
#include "monoseq/labels.hpp"

namespace monoseq {

/// Feature id used by label n-gram (transition) weights.
inline constexpr FeatureId kTransitionFeature = 0xFFFFFFFEu;

/// Key of one weight: (feature, label history, label). Two kinds exist:
/// observation weights (source feature, empty history) and transition
/// weights (kTransitionFeature, history of 1..order labels).
struct WeightKey {
  FeatureId feature = 0;
  LabelHistory history;
  LabelId label = 0;

  friend bool operator==(const WeightKey&, const WeightKey&) = default;
  friend auto operator<=>(const WeightKey&, const WeightKey&) = default;
};

struct TransitionKey {
  LabelHistory history;
  LabelId label = 0;
  friend bool operator==(const TransitionKey&, const TransitionKey&) = default;
};

struct TransitionKeyHash {
  std::size_t operator()(const TransitionKey& k) const noexcept {
    return LabelHistoryHash{}(k.history) * 31u + k.label;
  }
};

/// Sparse weights of one CRF order. Absent entries read as 0.0.
///
/// Values are held as raw * scale so that an L2 shrink of every weight is a
/// single multiplication (see shrink()).
class WeightTable {
 public:
  struct ObservationEntry {
    LabelId label;
    double raw;
  };
  using ObservationRow = std::vector<ObservationEntry>;  // sorted by label

  explicit WeightTable(std::size_t order = 1);

  std::size_t order() const noexcept { return order_; }

  double get(const WeightKey& key) const;
  void set(const WeightKey& key, double value);

  double observation(FeatureId feature, LabelId label) const;
  double transition(const LabelHistory& history, LabelId label) const;

  /// Row of raw observation values for a feature, or nullptr.
  const ObservationRow* observation_row(FeatureId feature) const;
  ObservationRow* mutable_observation_row(FeatureId feature);
  /// Raw slot for an existing observation weight, or nullptr.
  double* observation_slot(FeatureId feature, LabelId label);
  /// Raw slot for a transition weight, created (at 0.0) if absent.
  double& transition_slot(const TransitionKey& key);
  double* find_transition_slot(const TransitionKey& key);

  /// Inserts a zero observation weight if absent.
  void ensure_observation(FeatureId feature, LabelId label);

  double scale() const noexcept { return scale_; }
  /// Multiplies every weight by `factor`.
  void shrink(double factor);
  /// Folds the scale back into the raw values.
  void normalize_scale();

  double squared_norm() const;
  std::size_t size() const;

  /// Visits every stored weight in sorted key order.
  void for_each_sorted(const std::function<void(const WeightKey&, double)>& fn) const;

 private:
  std::size_t order_;
  double scale_ = 1.0;
  std::unordered_map<FeatureId, ObservationRow> observation_;
  std::unordered_map<TransitionKey, double, TransitionKeyHash> transition_;
};

}  // namespace monoseq
