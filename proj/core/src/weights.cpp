#include "monoseq/weights.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "monoseq/errors.hpp"

namespace monoseq {

LabelHistory LabelHistory::begin(std::size_t order) {
  if (order > kMaxOrder) throw ArgumentError("order exceeds " + std::to_string(kMaxOrder));
  LabelHistory h;
  h.size_ = static_cast<std::uint8_t>(order);
  h.ids_.fill(kBeginLabel);
  return h;
}

LabelHistory LabelHistory::of(std::initializer_list<LabelId> ids) {
  LabelHistory h;
  for (auto id : ids) h.push_back(id);
  return h;
}

LabelHistory LabelHistory::shifted(LabelId next) const {
  LabelHistory h = *this;
  if (size_ == 0) return h;
  for (std::size_t i = 0; i + 1 < size_; ++i) h.ids_[i] = ids_[i + 1];
  h.ids_[size_ - 1] = next;
  return h;
}

LabelHistory LabelHistory::suffix(std::size_t k) const {
  LabelHistory h;
  k = std::min<std::size_t>(k, size_);
  for (std::size_t i = size_ - k; i < size_; ++i) h.push_back(ids_[i]);
  return h;
}

void LabelHistory::push_back(LabelId id) {
  if (size_ >= kMaxOrder) throw ArgumentError("label history overflow");
  ids_[size_++] = id;
}

std::strong_ordering operator<=>(const LabelHistory& a, const LabelHistory& b) noexcept {
  const std::size_t n = std::min(a.size_, b.size_);
  for (std::size_t i = 0; i < n; ++i)
    if (auto c = a.ids_[i] <=> b.ids_[i]; c != 0) return c;
  return a.size_ <=> b.size_;
}

LabelAlphabet::LabelAlphabet(const std::set<OutputLabel>& labels)
    : labels_(labels.begin(), labels.end()) {
  if (labels_.size() >= kBeginLabel) throw ArgumentError("label alphabet too large");
}

std::optional<LabelId> LabelAlphabet::id(const OutputLabel& label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return std::nullopt;
  return static_cast<LabelId>(it - labels_.begin());
}

WeightTable::WeightTable(std::size_t order) : order_(order) {
  if (order < 1 || order > kMaxOrder)
    throw ArgumentError("weight table order must be in 1.." + std::to_string(kMaxOrder));
}

namespace {

void check_key(const WeightKey& key, std::size_t order) {
  if (key.feature == kTransitionFeature) {
    if (key.history.empty() || key.history.size() > order)
      throw ArgumentError("transition weight needs a history of 1..order labels");
  } else if (!key.history.empty()) {
    throw ArgumentError("observation weights are conjoined with the current label only");
  }
}

}  // namespace

double WeightTable::get(const WeightKey& key) const {
  check_key(key, order_);
  return key.feature == kTransitionFeature ? transition(key.history, key.label)
                                           : observation(key.feature, key.label);
}

void WeightTable::set(const WeightKey& key, double value) {
  check_key(key, order_);
  if (key.feature == kTransitionFeature) {
    transition_slot({key.history, key.label}) = value / scale_;
    return;
  }
  ensure_observation(key.feature, key.label);
  *observation_slot(key.feature, key.label) = value / scale_;
}

const WeightTable::ObservationRow* WeightTable::observation_row(FeatureId feature) const {
  auto it = observation_.find(feature);
  return it == observation_.end() ? nullptr : &it->second;
}

WeightTable::ObservationRow* WeightTable::mutable_observation_row(FeatureId feature) {
  auto it = observation_.find(feature);
  return it == observation_.end() ? nullptr : &it->second;
}

double WeightTable::observation(FeatureId feature, LabelId label) const {
  const auto* row = observation_row(feature);
  if (!row) return 0.0;
  auto it = std::lower_bound(row->begin(), row->end(), label,
                             [](const ObservationEntry& e, LabelId l) { return e.label < l; });
  return (it != row->end() && it->label == label) ? it->raw * scale_ : 0.0;
}

double WeightTable::transition(const LabelHistory& history, LabelId label) const {
  auto it = transition_.find({history, label});
  return it == transition_.end() ? 0.0 : it->second * scale_;
}

double* WeightTable::observation_slot(FeatureId feature, LabelId label) {
  auto it = observation_.find(feature);
  if (it == observation_.end()) return nullptr;
  auto& row = it->second;
  auto pos = std::lower_bound(row.begin(), row.end(), label,
                              [](const ObservationEntry& e, LabelId l) { return e.label < l; });
  return (pos != row.end() && pos->label == label) ? &pos->raw : nullptr;
}

double& WeightTable::transition_slot(const TransitionKey& key) { return transition_[key]; }

double* WeightTable::find_transition_slot(const TransitionKey& key) {
  auto it = transition_.find(key);
  return it == transition_.end() ? nullptr : &it->second;
}

void WeightTable::ensure_observation(FeatureId feature, LabelId label) {
  auto& row = observation_[feature];
  auto pos = std::lower_bound(row.begin(), row.end(), label,
                              [](const ObservationEntry& e, LabelId l) { return e.label < l; });
  if (pos == row.end() || pos->label != label) row.insert(pos, {label, 0.0});
}

void WeightTable::shrink(double factor) {
  scale_ *= factor;
  if (scale_ < 1e-100 || scale_ > 1e100) normalize_scale();
}

void WeightTable::normalize_scale() {
  for (auto& [f, row] : observation_)
    for (auto& e : row) e.raw *= scale_;
  for (auto& [k, v] : transition_) v *= scale_;
  scale_ = 1.0;
}

double WeightTable::squared_norm() const {
  double sum = 0.0;
  for (const auto& [f, row] : observation_)
    for (const auto& e : row) sum += e.raw * e.raw;
  for (const auto& [k, v] : transition_) sum += v * v;
  return sum * scale_ * scale_;
}

std::size_t WeightTable::size() const {
  std::size_t n = transition_.size();
  for (const auto& [f, row] : observation_) n += row.size();
  return n;
}

void WeightTable::for_each_sorted(const std::function<void(const WeightKey&, double)>& fn) const {
  std::vector<FeatureId> features;
  features.reserve(observation_.size());
  for (const auto& [f, row] : observation_) features.push_back(f);
  std::sort(features.begin(), features.end());
  for (auto f : features)
    for (const auto& e : observation_.at(f)) fn({f, {}, e.label}, e.raw * scale_);

  std::vector<std::pair<TransitionKey, double>> trans(transition_.begin(), transition_.end());
  std::sort(trans.begin(), trans.end(), [](const auto& a, const auto& b) {
    if (a.first.history != b.first.history) return a.first.history < b.first.history;
    return a.first.label < b.first.label;
  });
  for (const auto& [k, v] : trans) fn({kTransitionFeature, k.history, k.label}, v * scale_);
}

}  // namespace monoseq
