#include "monoseq/cli/manifest.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "monoseq/errors.hpp"
#include "monoseq/textio.hpp"

namespace monoseq::cli {

void Manifest::set(const std::string& key, std::string value) {
  if (key.empty() || key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos)
    throw ArgumentError("manifest entry cannot hold '" + key + "'");
  entries_[key] = std::move(value);
}

void Manifest::set(const std::string& key, double value) { set(key, textio::format_double(value)); }

std::optional<std::string> Manifest::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Manifest::number(const std::string& key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  return textio::parse_double(*v);
}

void Manifest::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

Manifest Manifest::read(std::istream& in) {
  Manifest m;
  std::string line;
  std::size_t n = 0;
  while (textio::read_line(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) throw FormatError(n, "manifest line lacks key=value");
    if (!m.entries_.emplace(line.substr(0, eq), line.substr(eq + 1)).second)
      throw FormatError(n, "manifest key repeated: " + line.substr(0, eq));
  }
  return m;
}

void Manifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  write(out);
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read(in);
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  auto p = output;
  p += ".manifest";
  return p;
}

}  // namespace monoseq::cli
