#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chatdrift/errors.hpp"

namespace chatdrift::csv {

// RFC 4180: fields separated by ',', records by LF or CRLF; a field starting
// with '"' runs to the matching closing quote, with "" as an escaped quote and
// separators/newlines taken literally inside.

// Parses a whole document into rows of fields. A trailing newline does not
// produce an empty record.
inline std::vector<std::vector<std::string>> parse(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    std::size_t i = 0;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (i < text.size()) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field.push_back(c);
                ++i;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field.empty() && !field_was_quoted) {
                    in_quotes = true;
                    field_was_quoted = true;
                } else {
                    field.push_back(c); // stray quote mid-field, keep it
                }
                ++i;
                break;
            case ',':
                end_field();
                ++i;
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_record();
                ++i;
                break;
            case '\n':
                end_record();
                ++i;
                break;
            default:
                field.push_back(c);
                ++i;
        }
    }
    if (in_quotes) fail(Errc::corrupt_file, "csv: unterminated quoted field");
    if (!field.empty() || field_was_quoted || !row.empty()) end_record();
    return rows;
}

inline bool needs_quoting(std::string_view field) {
    return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_field(std::string& out, std::string_view field) {
    if (!needs_quoting(field)) {
        out.append(field);
        return;
    }
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

inline void write_row(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        write_field(out, fields[i]);
    }
    out.push_back('\n');
}

} // namespace chatdrift::csv
