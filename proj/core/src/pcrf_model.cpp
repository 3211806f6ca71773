#include <istream>
#include <ostream>
#include <string>

#include "monoseq/errors.hpp"
#include "monoseq/pcrf.hpp"
#include "monoseq/textio.hpp"

namespace monoseq {

PositionFeatures lookup_features(const Symbols& source, const FeatureConfig& cfg,
                                 const FeatureTable& table) {
  PositionFeatures out(source.size());
  for (std::size_t p = 0; p < source.size(); ++p)
    for (const auto& f : extract(source, p, cfg)) out[p].push_back(table.lookup(f));
  return out;
}

namespace {

// Lattice on which the final order runs: every earlier order prunes in turn.
PrunedLattice coarse_lattice(const ModelStack& stack, const PositionFeatures& features) {
  auto lattice = PrunedLattice::full(features.size(), stack.labels.size());
  for (std::size_t k = 0; k + 1 < stack.weights.size(); ++k) {
    const auto marg = forward_backward(stack.weights[k], lattice, features);
    lattice = prune(lattice, marg, stack.train.tau, stack.train.top_k);
  }
  return lattice;
}

}  // namespace

std::pair<PrunedLattice, Marginals> cascade(const ModelStack& stack, const PositionFeatures& features) {
  auto lattice = coarse_lattice(stack, features);
  auto marg = forward_backward(stack.weights.back(), lattice, features);
  return {std::move(lattice), std::move(marg)};
}

std::vector<LabelId> decode_labels(const ModelStack& stack, const Symbols& source) {
  if (source.empty()) return {};
  const auto features = lookup_features(source, stack.features, stack.table);
  const auto lattice = coarse_lattice(stack, features);
  return viterbi(build_graph(stack.weights.back(), lattice, features), lattice);
}

Symbols decode(const ModelStack& stack, const Symbols& source) {
  Symbols out;
  for (LabelId id : decode_labels(stack, source)) out += stack.labels.label(id);
  return out;
}

namespace {

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string encode_history(const LabelHistory& h) {
  std::string out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i) out += ',';
    out += h[i] == kBeginLabel ? std::string("B") : std::to_string(h[i]);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string line;
    if (!textio::read_line(in_, line)) throw FormatError(line_no_ + 1, "unexpected end of model file");
    ++line_no_;
    return line;
  }

  std::string value(std::string_view key) {
    auto line = next();
    const auto tab = line.find('\t');
    if (tab == std::string::npos || std::string_view(line).substr(0, tab) != key)
      throw FormatError(line_no_, "expected field '" + std::string(key) + "'");
    return line.substr(tab + 1);
  }

  bool try_next(std::string& line) {
    if (!textio::read_line(in_, line)) return false;
    ++line_no_;
    return true;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

LabelId parse_label_id(std::string_view s, std::size_t line, std::size_t alphabet) {
  if (s == "B") return kBeginLabel;
  const auto v = textio::parse_size(s, line);
  if (v >= alphabet) throw FormatError(line, "label id out of range");
  return static_cast<LabelId>(v);
}

}  // namespace

void write_model(std::ostream& out, const ModelStack& stack) {
  const auto& t = stack.train;
  out << kPcrfMagic << '\t' << kPcrfFormatVersion << '\n';
  out << "window\t" << stack.features.window << '\n';
  out << "max_mgram\t" << stack.features.max_mgram << '\n';
  out << "orders\t" << join_sizes(t.orders) << '\n';
  out << "tau\t" << textio::format_double(t.tau) << '\n';
  out << "top_k\t" << t.top_k << '\n';
  out << "epochs\t" << t.epochs << '\n';
  out << "eta0\t" << textio::format_double(t.eta0) << '\n';
  out << "lambda\t" << textio::format_double(t.lambda) << '\n';
  out << "seed\t" << t.seed << '\n';
  out << "batch_size\t" << t.batch_size << '\n';
  out << "support_threshold\t" << textio::format_double(t.support_threshold) << '\n';
  out << "span_bound\t" << stack.span_bound << '\n';
  out << "labels\t" << stack.labels.size() << '\n';
  for (const auto& l : stack.labels.labels()) out << utf8::encode(l) << '\n';
  out << "features\t" << stack.table.size() << '\n';
  for (std::size_t f = 0; f < stack.table.size(); ++f)
    out << stack.table.name(static_cast<FeatureId>(f)) << '\n';
  for (const auto& w : stack.weights) {
    std::vector<std::string> rows;
    w.for_each_sorted([&](const WeightKey& key, double value) {
      if (value == 0.0) return;
      std::string row;
      if (key.feature == kTransitionFeature)
        row = "t\t" + encode_history(key.history);
      else
        row = "o\t" + std::to_string(key.feature);
      row += '\t' + std::to_string(key.label) + '\t' + textio::format_double(value) + '\n';
      rows.push_back(std::move(row));
    });
    out << "weights\t" << w.order() << '\t' << rows.size() << '\n';
    for (const auto& r : rows) out << r;
  }
}

ModelStack read_model(std::istream& in) {
  Reader r(in);
  {
    std::string header;
    if (!r.try_next(header)) throw VersionError("empty model file");
    const auto f = textio::split(header, '\t');
    if (f.size() != 2 || f[0] != kPcrfMagic)
      throw VersionError("not a PCRF model file (header '" + header + "')");
    if (f[1] != std::to_string(kPcrfFormatVersion))
      throw VersionError("incompatible PCRF model format version " + std::string(f[1]) +
                         " (supported: " + std::to_string(kPcrfFormatVersion) + ")");
  }
  ModelStack s;
  s.features.window = textio::parse_size(r.value("window"));
  s.features.max_mgram = textio::parse_size(r.value("max_mgram"));
  s.train.orders.clear();
  const auto orders = r.value("orders");
  for (auto part : textio::split(orders, ','))
    s.train.orders.push_back(textio::parse_size(part, r.line_no()));
  s.train.tau = textio::parse_double(r.value("tau"), r.line_no());
  s.train.top_k = textio::parse_size(r.value("top_k"), r.line_no());
  s.train.epochs = textio::parse_size(r.value("epochs"), r.line_no());
  s.train.eta0 = textio::parse_double(r.value("eta0"), r.line_no());
  s.train.lambda = textio::parse_double(r.value("lambda"), r.line_no());
  s.train.seed = textio::parse_size(r.value("seed"), r.line_no());
  s.train.batch_size = textio::parse_size(r.value("batch_size"), r.line_no());
  s.train.support_threshold = textio::parse_double(r.value("support_threshold"), r.line_no());
  s.span_bound = textio::parse_size(r.value("span_bound"), r.line_no());
  s.train.validate();
  s.features.validate();

  const auto nlabels = textio::parse_size(r.value("labels"), r.line_no());
  std::set<OutputLabel> labels;
  for (std::size_t i = 0; i < nlabels; ++i) {
    auto decoded = utf8::decode(r.next());
    if (!decoded) throw DecodeError(r.line_no(), "malformed UTF-8 label");
    labels.insert(*decoded);
  }
  if (labels.size() != nlabels) throw FormatError(r.line_no(), "duplicate labels");
  s.labels = LabelAlphabet(labels);

  const auto nfeatures = textio::parse_size(r.value("features"), r.line_no());
  for (std::size_t i = 0; i < nfeatures; ++i) s.table.intern(r.next());
  if (s.table.size() != nfeatures) throw FormatError(r.line_no(), "duplicate feature strings");
  s.table.freeze();

  for (std::size_t order : s.train.orders) {
    const auto head_line = r.value("weights");
    const auto head = textio::split(head_line, '\t');
    if (head.size() != 2 || textio::parse_size(head[0], r.line_no()) != order)
      throw FormatError(r.line_no(), "weights block for order " + std::to_string(order) + " expected");
    const auto count = textio::parse_size(head[1], r.line_no());
    WeightTable w(order);
    for (std::size_t i = 0; i < count; ++i) {
      const auto line = r.next();
      const auto f = textio::split(line, '\t');
      if (f.size() != 4 || (f[0] != "o" && f[0] != "t"))
        throw FormatError(r.line_no(), "malformed weight row");
      const auto label = parse_label_id(f[2], r.line_no(), s.labels.size());
      const double value = textio::parse_double(f[3], r.line_no());
      if (f[0] == "o") {
        const auto fid = textio::parse_size(f[1], r.line_no());
        if (fid >= nfeatures) throw FormatError(r.line_no(), "feature id out of range");
        w.set({static_cast<FeatureId>(fid), {}, label}, value);
      } else {
        LabelHistory h;
        for (auto part : textio::split(f[1], ','))
          h.push_back(parse_label_id(part, r.line_no(), s.labels.size()));
        w.set({kTransitionFeature, h, label}, value);
      }
    }
    s.weights.push_back(std::move(w));
  }
  return s;
}

}  // namespace monoseq
