#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace evstar::csv {

/// Splits one CSV line on commas (no quoting; none of our formats need it).
std::vector<std::string_view> split(std::string_view line);

std::string_view trim(std::string_view s);

/// Strict numeric parsing; throws Errc::parse mentioning `where`.
double to_double(std::string_view field, const std::string& where);
std::int64_t to_int(std::string_view field, const std::string& where);

/// Line-numbered reader that checks the header and yields data rows.
class Reader {
public:
  Reader(std::istream& in, std::string source);

  /// Throws Errc::parse unless the first line equals `header` (trailing CR/space ignored).
  void expect_header(std::string_view header);

  /// Next non-blank data row; false at EOF.
  bool next(std::vector<std::string_view>& fields);

  /// "source:line" for error messages.
  std::string where() const;
  std::size_t line_number() const { return line_no_; }

private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t line_no_ = 0;
};

/// Opens a file for reading or throws Errc::io.
std::ifstream open_input(const std::filesystem::path& path);

/// Writes through a temporary sibling file renamed into place on success;
/// nothing is left behind if `body` throws.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& body);

}  // namespace evstar::csv
