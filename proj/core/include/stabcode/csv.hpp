#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stabcode::csv {

/// Builds a CSV document in memory; nothing touches the filesystem until
/// write_file, so a failed computation never leaves a partial output behind.
class Table {
public:
    explicit Table(std::vector<std::string> header) : columns_(header.size()) {
        append_row_raw(header);
    }

    void append(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw std::logic_error("csv: column count mismatch");
        append_row_raw(cells);
    }

    static std::string num(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        return buf;
    }
    static std::string num(std::int64_t v) { return std::to_string(v); }

    const std::string& text() const { return text_; }

    void write_file(const std::string& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw std::runtime_error("csv: cannot open " + path + " for writing");
        out << text_;
        if (!out) throw std::runtime_error("csv: write to " + path + " failed");
    }

private:
    void append_row_raw(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    std::size_t columns_;
    std::string text_;
};

}  // namespace stabcode::csv
