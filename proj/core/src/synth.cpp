#include "monoseq/synth.hpp"

#include <string>

#include "monoseq/errors.hpp"
#include "monoseq/rng.hpp"

namespace monoseq {

RuleSpec make_rule(std::string_view name) {
  RuleSpec r;
  if (name == "identity") {
    r.kind = RuleKind::identity;
  } else if (name == "local_sub") {
    r.kind = RuleKind::local_sub;
    r.from = U's';
    r.to = U"z";
    r.context = {U'a', U'e', U'i', U'o', U'u'};
  } else if (name == "expand") {
    r.kind = RuleKind::expand;
    r.from = U'm';
    r.to = U"rn";
  } else if (name == "delete") {
    r.kind = RuleKind::remove;
    r.from = U'l';
    r.context = {U't'};
  } else if (name == "harmony") {
    r.kind = RuleKind::harmony;
  } else if (name == "context2") {
    r.kind = RuleKind::context2;
    r.alphabet = U"abc";
    r.from = U'a';
    r.to = U"b";
    r.context = {U'a'};
  } else {
    throw ArgumentError("unknown rule '" + std::string(name) + "'");
  }
  return r;
}

std::string_view rule_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::identity: return "identity";
    case RuleKind::local_sub: return "local_sub";
    case RuleKind::expand: return "expand";
    case RuleKind::remove: return "delete";
    case RuleKind::harmony: return "harmony";
    case RuleKind::context2: return "context2";
  }
  return "unknown";
}

namespace {

bool triggered(const RuleSpec& rule, const Symbols& source, std::size_t i) {
  if (source[i] != rule.from) return false;
  if (rule.context.empty()) return true;
  return i > 0 && rule.context.contains(source[i - 1]);
}

Symbols apply_harmony(const RuleSpec& rule, const Symbols& source) {
  const auto first = source.find_first_of(rule.vowels);
  if (first == Symbols::npos) return source;
  const auto last = source.find_last_of(rule.vowels);
  Symbols out = source;
  out[last] = source[first];
  return out;
}

}  // namespace

Symbols apply_rule(const RuleSpec& rule, const Symbols& source) {
  switch (rule.kind) {
    case RuleKind::identity:
      return source;
    case RuleKind::harmony:
      return apply_harmony(rule, source);
    case RuleKind::context2: {
      Symbols out;
      for (char32_t c : source) {
        const std::size_t n = out.size();
        const bool fire = c == rule.from && n >= 2 && rule.context.contains(out[n - 1]) &&
                          rule.context.contains(out[n - 2]);
        if (fire)
          out += rule.to;
        else
          out.push_back(c);
      }
      return out;
    }
    case RuleKind::local_sub:
    case RuleKind::expand:
    case RuleKind::remove: {
      Symbols out;
      for (std::size_t i = 0; i < source.size(); ++i) {
        if (triggered(rule, source, i))
          out += rule.to;
        else
          out.push_back(source[i]);
      }
      return out;
    }
  }
  return source;
}

Corpus synth_generate(const RuleSpec& rule, std::size_t n, std::uint64_t seed) {
  if (rule.alphabet.empty()) throw ArgumentError("synth: empty alphabet");
  if (rule.min_length == 0 || rule.min_length > rule.max_length)
    throw ArgumentError("synth: invalid length range");
  Rng rng(seed);
  std::vector<StringPair> pairs;
  pairs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto len = static_cast<std::size_t>(rng.between(
        static_cast<std::int64_t>(rule.min_length), static_cast<std::int64_t>(rule.max_length)));
    Symbols src;
    for (std::size_t i = 0; i < len; ++i) src.push_back(rule.alphabet[rng.below(rule.alphabet.size())]);
    Symbols tgt = apply_rule(rule, src);
    pairs.push_back({std::move(src), std::move(tgt)});
  }
  return Corpus(std::move(pairs));
}

}  // namespace monoseq
