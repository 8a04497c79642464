#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sylcap/errors.hpp"

namespace sylcap::csvio {

struct Row {
    std::size_t line = 0; // 1-based physical line where the row starts
    std::vector<std::string> fields;
};

/// RFC-4180-style parser. Quoting is honored for comma-delimited input;
/// tab-delimited input is read verbatim (fields cannot contain tabs).
/// Lines starting with '#' outside a quoted field are skipped as comments.
inline std::vector<Row> parse(std::string_view text, char delim) {
    const bool quoted_mode = delim == ',';
    std::vector<Row> rows;
    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (text[i] == '#') { // comment line
            while (i < n && text[i] != '\n') ++i;
            if (i < n) { ++i; ++line; }
            continue;
        }
        Row row;
        row.line = line;
        std::string field;
        bool in_quotes = false;
        bool row_done = false;
        bool saw_any = false;
        while (i < n && !row_done) {
            char c = text[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                    } else {
                        in_quotes = false;
                        ++i;
                    }
                } else {
                    if (c == '\n') ++line;
                    field.push_back(c);
                    ++i;
                }
                continue;
            }
            switch (c) {
            case '"':
                if (quoted_mode && field.empty()) {
                    in_quotes = true;
                } else {
                    field.push_back('"');
                }
                ++i;
                break;
            case '\r':
                ++i;
                break;
            case '\n':
                ++line;
                ++i;
                row_done = true;
                break;
            default:
                if (c == delim) {
                    row.fields.push_back(std::move(field));
                    field.clear();
                    saw_any = true;
                } else {
                    field.push_back(c);
                }
                ++i;
                break;
            }
        }
        if (in_quotes)
            throw DataError("line " + std::to_string(row.line) + ": unterminated quoted field");
        if (saw_any || !field.empty()) {
            row.fields.push_back(std::move(field));
            rows.push_back(std::move(row));
        } else if (!row_done) {
            break; // trailing empty fragment without newline
        }
        // blank lines produce no row
    }
    return rows;
}

inline std::string escape(std::string_view field, char delim) {
    if (delim == '\t') {
        if (field.find('\t') != std::string_view::npos ||
            field.find('\n') != std::string_view::npos)
            throw DataError("tab-separated field may not contain tabs or newlines");
        return std::string(field);
    }
    bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs && !field.empty() && field.front() == '#') needs = true;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3); // UTF-8 BOM
    return text;
}

inline std::vector<Row> read_file(const std::filesystem::path& path, char delim) {
    try {
        return parse(read_text_file(path), delim);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

} // namespace sylcap::csvio
