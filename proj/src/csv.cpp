#include "confusion/csv.hpp"

namespace confusion {

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;

    std::string field;
    bool quoted = false;
    bool any = false;
    while (true) {
        if (c == EOF) {
            fields.push_back(std::move(field));
            return true;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                int peek = in_.get();
                if (peek == '"') {
                    field.push_back('"');
                } else {
                    quoted = false;
                    c = peek;
                    continue;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty() && !any) {
            quoted = true;
        } else if (ch == delimiter_) {
            fields.push_back(std::move(field));
            field.clear();
            any = false;
            c = in_.get();
            continue;
        } else if (ch == '\r') {
            int peek = in_.peek();
            if (peek == '\n') in_.get();
            fields.push_back(std::move(field));
            return true;
        } else if (ch == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
            any = true;
        }
        c = in_.get();
    }
}

std::string csv_escape(std::string_view field, char delimiter) {
    bool needs_quote = false;
    for (char c : field) {
        if (c == delimiter || c == '"' || c == '\n' || c == '\r') {
            needs_quote = true;
            break;
        }
    }
    if (!needs_quote) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace confusion
