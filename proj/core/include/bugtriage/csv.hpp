#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace bugtriage::csv {

using Record = std::vector<std::string>;

/// Splits RFC-4180 text into records. Quoted fields may contain separators,
/// doubled quotes and line breaks. CRLF and LF line endings are accepted; a
/// leading UTF-8 BOM is skipped. Throws DataError on an unterminated quote.
std::vector<Record> parse(std::string_view text);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_record(std::ostream& out, const Record& record);

}  // namespace bugtriage::csv
