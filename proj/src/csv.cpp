#include "vegrisk/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "vegrisk/errors.hpp"

namespace vegrisk {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string text;
  constexpr std::size_t kShown = 10;
  for (std::size_t i = 0; i < issues.size() && i < kShown; ++i) {
    if (i) text += '\n';
    text += issues[i];
  }
  if (issues.size() > kShown) {
    text += "\n... and " + std::to_string(issues.size() - kShown) + " more";
  }
  return text;
}

}  // namespace

ParseError::ParseError(std::vector<std::string> issues)
    : ValidationError(join_issues(issues)), issues_(std::move(issues)) {}

}  // namespace vegrisk

namespace vegrisk::csv {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::optional<std::size_t> Document::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Document::column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw ValidationError(source + ": missing required column '" + std::string(name) + "'");
}

std::string Document::where(const Row& row) const {
  return source + ":" + std::to_string(row.line);
}

Document read(std::istream& in, std::string source) {
  Document doc;
  doc.source = std::move(source);
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool record_has_content = false;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool have_header = false;

  auto finish_record = [&] {
    fields.push_back(std::move(field));
    field.clear();
    const bool blank = fields.size() == 1 && fields[0].empty() && !record_has_content;
    if (!blank) {
      for (auto& f : fields) {
        if (!f.empty() && f.back() == '\r') f.pop_back();
      }
      if (!have_header) {
        for (auto& f : fields) f = std::string(trim(f));
        if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
        doc.header = std::move(fields);
        have_header = true;
      } else {
        doc.rows.push_back(Row{record_line, std::move(fields)});
      }
    }
    fields.clear();
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        record_has_content = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        record_has_content = true;
        break;
      case '\n':
        finish_record();
        ++line;
        record_line = line;
        break;
      default:
        field += c;
        break;
    }
  }
  if (in_quotes) {
    throw ParseError({doc.source + ":" + std::to_string(record_line) + ": unterminated quoted field"});
  }
  if (!field.empty() || !fields.empty() || record_has_content) finish_record();
  if (!have_header) throw ValidationError(doc.source + ": empty file (no header row)");
  return doc;
}

Document read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return read(in, path.string());
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

Writer& Writer::field(std::string_view text) {
  if (!first_) out_ << ',';
  first_ = false;
  const bool needs_quotes = text.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) {
    out_ << text;
    return *this;
  }
  out_ << '"';
  for (char c : text) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

void Writer::end_row() {
  out_ << '\n';
  first_ = true;
}

void Writer::row(const std::vector<std::string>& fields) {
  for (const auto& f : fields) field(f);
  end_row();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace vegrisk::csv
