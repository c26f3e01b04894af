#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace larch::csv {

/// Shortest round-trip-safe text: 17 significant digits, "nan"/"inf" spelled out.
[[nodiscard]] std::string format(double v);

/// Writes a '#' comment line, a header row and data rows. Fields are joined with ','.
class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);

  void comment(std::string_view text);
  /// `# key=value key=value ...` on one line.
  void comment(const std::vector<std::pair<std::string, std::string>>& fields);
  void header(std::initializer_list<std::string_view> names);
  void row(const std::vector<std::string>& fields);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Observation series from a file with either one headerless numeric column or a header
/// naming a column `x`. Lines starting with '#' and blank lines are skipped. Throws
/// ParseError (1-based file row and column) on non-numeric or non-finite entries and
/// IncompleteInputError on a file without data.
[[nodiscard]] std::vector<double> load_series(const std::filesystem::path& path);

}  // namespace larch::csv
