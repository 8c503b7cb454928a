#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace automt::csv
{

// RFC 4180 subset: comma separator, double-quote quoting, CRLF or LF rows.
struct Table
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::vector<std::string>> parse_records(std::string_view text);

/// First record becomes the header. Throws ParseError on unterminated quotes.
Table parse(std::string_view text);

std::string write_record(const std::vector<std::string> & fields);
std::string write(const Table & table);

}  // namespace automt::csv
