// csv.hpp — diff-friendly numeric tables: named columns, rows of doubles,
// 17 significant digits so parsing reproduces values exactly.

#pragma once

#include <string>
#include <vector>

namespace dickeband::io {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void append(std::vector<double> row);
};

std::string format_full(double value);  // shortest round-trip-exact decimal

std::string to_csv(const Table& table);
Table parse_csv(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace dickeband::io
