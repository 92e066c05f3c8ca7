#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Minimal RFC-4180 reader/writer. Quoted fields may contain commas, quotes
// ("" escape) and line breaks.
namespace vegrisk::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

struct Document {
  std::string source;
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Index of a header column. Throws ValidationError naming the source.
  [[nodiscard]] std::size_t column(std::string_view name) const;
  [[nodiscard]] std::optional<std::size_t> find_column(std::string_view name) const;

  /// "source:line" prefix for diagnostics.
  [[nodiscard]] std::string where(const Row& row) const;
};

Document read(std::istream& in, std::string source);
Document read_file(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Strict full-field parse. Returns nullopt on any trailing garbage.
std::optional<double> parse_number(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string_view trim(std::string_view text);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& field(std::string_view text);
  Writer& field(double value) { return field(format_number(value)); }
  void end_row();

  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  bool first_ = true;
};

/// Writes `text` to `path` through a temporary file, creating parent
/// directories as needed.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace vegrisk::csv
