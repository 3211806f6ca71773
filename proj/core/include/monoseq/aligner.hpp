#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "monoseq/corpus.hpp"

namespace monoseq {

/// Output emitted for one source symbol: 0..L target symbols. Empty = epsilon.
using OutputLabel = Symbols;

struct AlignedStep {
  char32_t source = 0;
  OutputLabel label;

  friend bool operator==(const AlignedStep&, const AlignedStep&) = default;
};

/// One step per source symbol; concatenated labels reproduce the target.
struct AlignedPair {
  std::vector<AlignedStep> steps;

  Symbols source() const;
  Symbols target() const;

  friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

using EmissionKey = std::pair<char32_t, OutputLabel>;

/// Log-space emission table P(label | source symbol) of the monotone 1-to-(0..L)
/// alignment model. Entries with zero probability are simply absent.
struct AlignmentModel {
  std::size_t span_bound = 2;
  std::map<EmissionKey, double> log_emit;
  std::size_t iterations_run = 0;
  double final_loglik = 0.0;  // per-pair average under the final parameters

  double log_prob(char32_t symbol, const OutputLabel& label) const;
};

struct EmConfig {
  std::size_t span_bound = 2;
  std::size_t max_iters = 30;
  double tol = 1e-4;
  double diagonal_bonus = 0.1;
  std::size_t threads = 1;
};

struct EmReport {
  std::vector<std::size_t> excluded;  // indices of infeasible pairs
  std::vector<double> loglik_history;  // per-pair average; [0] is the initial model
};

/// Sufficient statistics of one E-step.
struct ExpectedCounts {
  std::map<EmissionKey, double> counts;
  double total_loglik = 0.0;
  std::size_t pairs = 0;
};

/// |target| <= L * |source| (every step emits at most L symbols).
bool feasible(const StringPair& pair, std::size_t span_bound);

/// Uniform over every emission usable in some monotone alignment of some
/// feasible pair, plus `diagonal_bonus` on the label equal to the symbol.
AlignmentModel initial_alignment_model(const Corpus& corpus, std::size_t span_bound,
                                       double diagonal_bonus);

/// Forward-backward expected emission counts over all feasible pairs.
ExpectedCounts e_step(const AlignmentModel& model, const Corpus& corpus, std::size_t threads = 1);

/// Log of the total probability of all monotone alignments of `pair`,
/// computed with the forward pass (`backward == false`) or the backward pass.
double pair_log_prob(const AlignmentModel& model, const StringPair& pair, bool backward = false);

/// Expectation-maximization from initial_alignment_model. Stops after
/// max_iters M-steps or when the per-pair average log-likelihood improves by
/// less than tol. Throws TrainingError when no pair is feasible.
AlignmentModel em_train(const Corpus& corpus, const EmConfig& config, EmReport* report = nullptr);

/// Most probable alignment; ties prefer shorter labels at the earliest
/// differing step. Throws AlignmentError if no alignment has non-zero mass.
AlignedPair viterbi_align(const AlignmentModel& model, const StringPair& pair);

struct AlignedCorpus {
  std::vector<AlignedPair> aligned;
  std::set<OutputLabel> label_alphabet;  // always contains epsilon
  std::size_t skipped = 0;
  std::vector<std::size_t> skipped_indices;
};

AlignedCorpus align_corpus(const AlignmentModel& model, const Corpus& corpus);

/// The label set of a sequence of aligned pairs, plus epsilon.
std::set<OutputLabel> label_alphabet_of(const std::vector<AlignedPair>& aligned);

// Persistence. Both formats are versioned, sorted and byte-stable.
void write_alignment_model(std::ostream& out, const AlignmentModel& model);
AlignmentModel read_alignment_model(std::istream& in);

/// "source<TAB>target<TAB>len,len,..." per pair after a version header.
void write_aligned(std::ostream& out, const std::vector<AlignedPair>& aligned);
std::vector<AlignedPair> read_aligned(std::istream& in);

}  // namespace monoseq
