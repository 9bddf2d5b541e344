#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ccl::csv {

using Record = std::vector<std::string>;

// RFC-4180 reader: comma-delimited, double-quote quoting with "" escapes,
// quoted fields may span lines. Accepts LF or CRLF record terminators.
// A trailing empty line is not a record. Throws InputError on an
// unterminated quote.
std::vector<Record> read_all(std::istream& in);

// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_record(std::ostream& out, const Record& record);

}  // namespace ccl::csv
