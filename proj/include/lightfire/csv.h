#pragma once
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lightfire::csv
{
/// Comma-separated table with a mandatory header row. Fields are unquoted; an
/// empty field denotes a missing value.
class Table
{
public:
  static Table parse(std::string_view text, const std::string& source = "<memory>");
  static Table read(const std::filesystem::path& path);

  /// Column position; throws "missing column <name>" if absent.
  [[nodiscard]] std::size_t column(std::string_view name) const;
  [[nodiscard]] bool has_column(std::string_view name) const;
  [[nodiscard]] std::size_t rows() const { return rows_.size(); }
  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
  [[nodiscard]] const std::string& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }
  [[nodiscard]] const std::string& source() const { return source_; }
private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Row-addressed parse helpers. `row` is the 1-based data row used in messages.
double parse_double(const std::string& field, std::string_view column, std::size_t row);
std::optional<double> parse_optional(const std::string& field, std::string_view column, std::size_t row);
long parse_int(const std::string& field, std::string_view column, std::size_t row);

/// Incremental writer producing `\n`-terminated lines.
class Writer
{
public:
  explicit Writer(const std::vector<std::string>& header);
  Writer& field(std::string_view s);
  Writer& field(double x);
  Writer& field(const std::optional<double>& x);
  Writer& field(long x);
  Writer& field(int x) { return field(static_cast<long>(x)); }
  void end_row();
  [[nodiscard]] const std::string& str() const { return out_; }
private:
  std::string out_;
  bool first_ = true;
};
}
