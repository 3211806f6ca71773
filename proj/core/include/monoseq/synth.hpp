#pragma once

#include <cstdint>
#include <set>
#include <string_view>

#include "monoseq/corpus.hpp"

namespace monoseq {

enum class RuleKind {
  identity,
  local_sub,  // from -> to (one symbol) when the previous source symbol is in `context`
  expand,     // from -> to (two symbols), optionally conditioned like local_sub
  remove,     // from -> nothing, optionally conditioned like local_sub
  harmony,    // last vowel of the output copies the first vowel of the input
  context2,   // from -> to when the two previous *output* symbols are both in `context`
};

/// Deterministic rewrite rule used to synthesize oracle corpora.
/// An empty `context` means the rewrite is unconditional.
struct RuleSpec {
  RuleKind kind = RuleKind::identity;
  Symbols alphabet = U"abcdefghijklmnopqrstuvwxyz";
  char32_t from = 0;
  Symbols to;
  std::set<char32_t> context;
  Symbols vowels = U"aeiou";
  std::size_t min_length = 3;
  std::size_t max_length = 20;
};

/// Default parameters for a named rule: identity, local_sub (s->z after a
/// vowel), expand (m->rn), delete (l->nothing after t), harmony, context2
/// (a->b after two output a's). Throws ArgumentError on an unknown name.
RuleSpec make_rule(std::string_view name);

std::string_view rule_name(RuleKind kind);

/// Applies the rule left to right.
Symbols apply_rule(const RuleSpec& rule, const Symbols& source);

/// n pairs whose sources are uniform over rule.alphabet with uniform length in
/// [min_length, max_length]; targets are apply_rule(source).
Corpus synth_generate(const RuleSpec& rule, std::size_t n, std::uint64_t seed);

}  // namespace monoseq
