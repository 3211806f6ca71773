#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>
#include <unordered_map>

#include "monoseq/errors.hpp"
#include "monoseq/parallel.hpp"
#include "monoseq/pcrf.hpp"
#include "monoseq/rng.hpp"

namespace monoseq {

std::vector<std::size_t> TrainConfig::schedule_up_to(std::size_t order) {
  std::vector<std::size_t> out(order);
  std::iota(out.begin(), out.end(), std::size_t{1});
  return out;
}

void TrainConfig::validate() const {
  if (orders.empty() || orders.front() != 1)
    throw ArgumentError("order schedule must start at 1");
  for (std::size_t k = 1; k < orders.size(); ++k)
    if (orders[k] <= orders[k - 1]) throw ArgumentError("order schedule must be strictly ascending");
  if (orders.back() > kMaxOrder)
    throw ArgumentError("orders above " + std::to_string(kMaxOrder) + " are not supported");
  if (!(tau >= 0.0 && tau < 1.0)) throw ArgumentError("tau must be in [0, 1)");
  if (top_k < 1) throw ArgumentError("top_k must be >= 1");
  if (!(eta0 > 0.0)) throw ArgumentError("eta0 must be positive");
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be non-negative");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!(support_threshold >= 0.0 && support_threshold <= 1.0))
    throw ArgumentError("support_threshold must be in [0, 1]");
}

namespace {

using TransitionGradient = std::vector<std::pair<TransitionKey, double>>;

// Gradient of one example's log-likelihood, in raw slots where possible.
struct ExampleGradient {
  std::vector<std::pair<double*, double>> observation;
  // Observation weights that do not exist yet: (feature, label, gradient).
  std::vector<std::tuple<FeatureId, LabelId, double>> created;
  // Keys may repeat; the order is fixed by the graph.
  TransitionGradient transition;
  double nll = 0.0;
};

// Non-gold labels whose marginal reaches `support_threshold` at a position
// also get gradient on the (feature, label) weights that are still missing, so
// that confusable labels can be pushed down. Pass a threshold above 1 to
// restrict the gradient to stored weights.
ExampleGradient example_gradient(WeightTable& weights, const CrfExample& ex,
                                 const PrunedLattice& lattice, double support_threshold) {
  ExampleGradient out;
  const auto graph = build_graph(weights, lattice, ex.features);
  const auto marg = forward_backward(graph, lattice);
  out.nll = marg.log_z - path_score(graph, lattice, ex.gold);
  const std::size_t order = graph.order;

  std::size_t alphabet = 0;
  for (const auto& c : lattice.candidates) alphabet = std::max<std::size_t>(alphabet, c.back() + 1u);
  std::vector<double> full_mass(graph.distinct_states.size() * alphabet, 0.0);
  std::vector<double> to_mass(graph.distinct_states.size(), 0.0);
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const auto& cands = lattice.candidates[i];
    for (FeatureId f : ex.features[i]) {
      auto* row = weights.mutable_observation_row(f);
      if (!row) continue;
      for (auto& entry : *row) {
        auto it = std::lower_bound(cands.begin(), cands.end(), entry.label);
        if (it == cands.end() || *it != entry.label) continue;
        const double p = marg.label_probs[i][static_cast<std::size_t>(it - cands.begin())];
        const double g = (entry.label == ex.gold[i] ? 1.0 : 0.0) - p;
        if (g != 0.0) out.observation.emplace_back(&entry.raw, g);
      }
    }
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const double p = marg.label_probs[i][c];
      if (cands[c] == ex.gold[i] || p < support_threshold || p == 0.0) continue;
      for (FeatureId f : ex.features[i])
        if (f != kUnknownFeature && !weights.observation_slot(f, cands[c]))
          out.created.emplace_back(f, cands[c], -p);
    }

    // Mass is summed per (global state, label) for the full-length history
    // and per reached state for the shorter ones, then expanded into keys.
    const auto& from_ids = graph.state_ids[i];
    const auto& to_ids = graph.state_ids[i + 1];
    const auto& edges = graph.edges[i];
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double p = marg.edge_probs[i][e];
      if (p == 0.0) continue;
      full_mass[from_ids[edges[e].from] * alphabet + cands[edges[e].cand]] += p;
      if (order > 1) to_mass[to_ids[edges[e].to]] += p;
    }
  }
  for (std::size_t cell = 0; cell < full_mass.size(); ++cell)
    if (full_mass[cell] != 0.0)
      out.transition.push_back(
          {{graph.distinct_states[cell / alphabet], static_cast<LabelId>(cell % alphabet)}, -full_mass[cell]});
  for (std::size_t s = 0; s < to_mass.size(); ++s) {
    if (to_mass[s] == 0.0) continue;
    const auto& h = graph.distinct_states[s];
    LabelHistory tail;
    for (std::size_t j = 0; j + 1 < h.size(); ++j) tail.push_back(h[j]);
    for (std::size_t k = 1; k < order; ++k) out.transition.push_back({{tail.suffix(k), h.back()}, -to_mass[s]});
  }
  LabelHistory h = LabelHistory::begin(order);
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    for (std::size_t k = 1; k <= order; ++k) out.transition.push_back({{h.suffix(k), ex.gold[i]}, 1.0});
    h = h.shifted(ex.gold[i]);
  }
  return out;
}

// Updates through raw slots. New observation weights are added separately by
// apply_created, after every slot update of the batch, because inserting into
// a row moves its entries.
void apply(WeightTable& weights, const ExampleGradient& g, double eta) {
  const double step = eta / weights.scale();
  for (const auto& [slot, v] : g.observation) *slot += step * v;
  for (const auto& [key, v] : g.transition) weights.transition_slot(key) += step * v;
}

void apply_created(WeightTable& weights, const ExampleGradient& g, double eta) {
  const double step = eta / weights.scale();
  for (const auto& [f, y, v] : g.created) {
    weights.ensure_observation(f, y);
    *weights.observation_slot(f, y) += step * v;
  }
}

std::vector<CrfExample> build_examples(std::span<const AlignedPair> aligned,
                                       const LabelAlphabet& labels, const FeatureConfig& fcfg,
                                       FeatureTable& table) {
  std::vector<CrfExample> out;
  out.reserve(aligned.size());
  for (std::size_t k = 0; k < aligned.size(); ++k) {
    const auto& a = aligned[k];
    if (a.steps.empty()) throw DataError("aligned example " + std::to_string(k) + " is empty");
    CrfExample ex;
    ex.features = featurize(a.source(), fcfg, table);
    for (const auto& step : a.steps) {
      auto id = labels.id(step.label);
      if (!id)
        throw DataError("aligned example " + std::to_string(k) + ": label '" +
                        utf8::encode(step.label) + "' is not in the label alphabet");
      ex.gold.push_back(*id);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

ModelStack sgd_train(std::span<const AlignedPair> aligned, const std::set<OutputLabel>& label_alphabet,
                     const TrainConfig& cfg, const FeatureConfig& fcfg, TrainReport* report) {
  cfg.validate();
  fcfg.validate();
  if (aligned.empty()) throw TrainingError("sgd_train: no training examples");

  ModelStack stack;
  stack.features = fcfg;
  stack.train = cfg;
  stack.labels = LabelAlphabet(label_alphabet);
  const auto examples = build_examples(aligned, stack.labels, fcfg, stack.table);
  stack.table.freeze();

  std::vector<PrunedLattice> lattices;
  lattices.reserve(examples.size());
  for (const auto& ex : examples)
    lattices.push_back(PrunedLattice::full(ex.gold.size(), stack.labels.size()));

  TrainReport local;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t k = 0; k < cfg.orders.size(); ++k) {
    WeightTable weights(cfg.orders[k]);
    for (const auto& ex : examples)
      for (std::size_t i = 0; i < ex.gold.size(); ++i)
        for (FeatureId f : ex.features[i]) weights.ensure_observation(f, ex.gold[i]);

    double cells = 0.0, positions = 0.0;
    for (const auto& lat : lattices)
      for (const auto& c : lat.candidates) {
        cells += static_cast<double>(c.size());
        positions += 1.0;
      }
    local.mean_lattice_size.push_back(cells / positions);

    std::vector<double> objectives;
    std::vector<ExampleGradient> batch;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      const double eta = cfg.eta0 / (1.0 + static_cast<double>(epoch));
      const double shrink = 1.0 / (1.0 + eta * cfg.lambda);
      rng.shuffle(std::span<std::size_t>(order));
      double total_nll = 0.0;
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t n = std::min(cfg.batch_size, order.size() - start);
        batch.assign(n, {});
        parallel_chunks(n, cfg.threads, [&](std::size_t b) {
          const std::size_t idx = order[start + b];
          batch[b] = example_gradient(weights, examples[idx], lattices[idx], cfg.support_threshold);
        });
        for (std::size_t b = 0; b < n; ++b) {
          if (!std::isfinite(batch[b].nll))
            throw TrainingError("non-finite objective at example " + std::to_string(order[start + b]) +
                                " (order " + std::to_string(cfg.orders[k]) + ")");
          total_nll += batch[b].nll;
          apply(weights, batch[b], eta);
        }
        for (std::size_t b = 0; b < n; ++b) apply_created(weights, batch[b], eta);
        for (std::size_t b = 0; b < n; ++b) weights.shrink(shrink);
      }
      objectives.push_back(total_nll / static_cast<double>(examples.size()) +
                           0.5 * cfg.lambda * weights.squared_norm());
    }
    weights.normalize_scale();
    local.epoch_objectives.push_back(std::move(objectives));

    if (k + 1 < cfg.orders.size()) {
      parallel_chunks(chunk_count(examples.size(), 64), cfg.threads, [&](std::size_t c) {
        const std::size_t end = std::min(examples.size(), (c + 1) * 64);
        for (std::size_t e = c * 64; e < end; ++e) {
          const auto marg = forward_backward(weights, lattices[e], examples[e].features);
          lattices[e] = prune(lattices[e], marg, cfg.tau, cfg.top_k, examples[e].gold);
        }
      });
    }
    stack.weights.push_back(std::move(weights));
  }
  if (report) *report = std::move(local);
  return stack;
}

double log_likelihood(const WeightTable& weights, const CrfExample& example,
                      const PrunedLattice& lattice) {
  const auto graph = build_graph(weights, lattice, example.features);
  const auto marg = forward_backward(graph, lattice);
  return path_score(graph, lattice, example.gold) - marg.log_z;
}

std::map<WeightKey, double> gradient(const WeightTable& weights, const CrfExample& example,
                                     const PrunedLattice& lattice, double lambda) {
  WeightTable copy = weights;
  const auto g = example_gradient(copy, example, lattice, 2.0);
  std::map<WeightKey, double> out;
  // Every stored observation weight the lattice can reach counts as touched,
  // even when its gradient is exactly zero.
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    for (FeatureId f : example.features[i]) {
      const auto* row = weights.observation_row(f);
      if (!row) continue;
      for (const auto& e : *row)
        if (std::binary_search(lattice.candidates[i].begin(), lattice.candidates[i].end(), e.label))
          out.try_emplace(WeightKey{f, {}, e.label}, 0.0);
    }
  }
  // Map raw slots back to keys.
  std::unordered_map<const double*, WeightKey> slot_keys;
  for (const auto& [key, v] : out) slot_keys.emplace(copy.observation_slot(key.feature, key.label), key);
  for (const auto& [slot, v] : g.observation) out[slot_keys.at(slot)] += v;
  for (const auto& [key, v] : g.transition) out[WeightKey{kTransitionFeature, key.history, key.label}] += v;
  if (lambda != 0.0)
    for (auto& [key, v] : out) v -= lambda * weights.get(key);
  return out;
}

double grad_check(const WeightTable& weights, const CrfExample& example,
                  const PrunedLattice& lattice, double epsilon, double lambda) {
  const auto analytic = gradient(weights, example, lattice, lambda);
  WeightTable probe = weights;
  auto objective = [&](const WeightKey& key, double w) {
    probe.set(key, w);
    return log_likelihood(probe, example, lattice) - 0.5 * lambda * w * w;
  };
  double worst = 0.0;
  for (const auto& [key, a] : analytic) {
    const double w = weights.get(key);
    const double numeric = (objective(key, w + epsilon) - objective(key, w - epsilon)) / (2.0 * epsilon);
    probe.set(key, w);
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace monoseq
