#include "evstar/csv.hpp"

#include "evstar/error.hpp"

#include <charconv>
#include <system_error>

namespace evstar {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::parse: return "parse";
    case Errc::duplicate: return "duplicate";
    case Errc::out_of_range: return "out-of-range";
    case Errc::ordering: return "ordering";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::degenerate: return "degenerate";
    case Errc::empty_table: return "empty-table";
    case Errc::empty_alignment: return "empty-alignment";
    case Errc::clock_skew: return "clock-skew";
    case Errc::lost_in_space: return "lost-in-space";
    case Errc::io: return "io";
    case Errc::config: return "config";
  }
  return "unknown";
}

namespace csv {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

double to_double(std::string_view field, const std::string& where) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(Errc::parse, where + ": expected a number, got '" + std::string(field) + "'");
  }
  return value;
}

std::int64_t to_int(std::string_view field, const std::string& where) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(Errc::parse, where + ": expected an integer, got '" + std::string(field) + "'");
  }
  return value;
}

Reader::Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

void Reader::expect_header(std::string_view header) {
  if (!std::getline(in_, line_)) {
    throw Error(Errc::parse, source_ + ": empty file, expected header '" + std::string(header) + "'");
  }
  ++line_no_;
  std::string_view got = trim(line_);
  if (got.size() >= 3 && got.substr(0, 3) == "\xEF\xBB\xBF") got.remove_prefix(3);
  if (got != header) {
    throw Error(Errc::parse, where() + ": expected header '" + std::string(header) + "', got '" +
                                 std::string(got) + "'");
  }
}

bool Reader::next(std::vector<std::string_view>& fields) {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (trim(line_).empty()) continue;
    fields = split(line_);
    return true;
  }
  return false;
}

std::string Reader::where() const { return source_ + ":" + std::to_string(line_no_); }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "' for reading");
  return in;
}

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& body) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(Errc::io, "cannot open '" + tmp.string() + "' for writing");
      body(out);
      out.flush();
      if (!out) throw Error(Errc::io, "write failed for '" + path.string() + "'");
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

}  // namespace csv
}  // namespace evstar
