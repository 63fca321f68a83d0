#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dpmpm::csv {

using Row = std::vector<std::string>;

// RFC 4180 dialect: comma separator, optional double-quoted fields with ""
// escapes, LF or CRLF line endings. A trailing newline does not produce an
// extra row. Throws FormatError on an unterminated quote.
std::vector<Row> parse(std::string_view text);

// Quotes the field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

std::string read_file(const std::filesystem::path& path);
// Throws IoError when the file cannot be opened or written.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace dpmpm::csv
