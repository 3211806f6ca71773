#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace monoseq::cli {

/// Sorted key=value record written next to every output as "<output>.manifest".
/// Keys under "args." hold the effective value of every flag, so a run can be
/// replayed from the manifest alone; multi-valued flags join values with tabs.
class Manifest {
 public:
  void set(const std::string& key, std::string value);
  void set(const std::string& key, double value);
  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> number(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  void write(std::ostream& out) const;
  /// Throws FormatError on a line without '=' or a repeated key.
  static Manifest read(std::istream& in);

  void save(const std::filesystem::path& path) const;
  static Manifest load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> entries_;
};

/// "<output>.manifest".
std::filesystem::path manifest_path(const std::filesystem::path& output);

}  // namespace monoseq::cli
