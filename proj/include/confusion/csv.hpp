#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace confusion {

// Streaming delimited-file reader. Handles quoted fields, doubled quotes and
// embedded newlines; the delimiter is comma or tab.
class CsvReader {
public:
    CsvReader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

    // Reads one record into fields; returns false at end of input.
    bool next(std::vector<std::string>& fields);

private:
    std::istream& in_;
    char delimiter_;
};

// Quotes a field when it contains the delimiter, a quote or a newline.
std::string csv_escape(std::string_view field, char delimiter);

} // namespace confusion
