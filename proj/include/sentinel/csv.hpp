#pragma once

#include <string>
#include <vector>

namespace sentinel {

/// Minimal comma-separated table. Fields are plain text without quoting or
/// embedded commas; this matches the SCADA export and log formats used here.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

std::vector<std::string> split_csv_line(const std::string& line);

/// Shortest round-trip decimal form of a double (empty cells stay empty).
std::string format_double(double v);

/// Write a file atomically: write to a temp sibling, then rename into place.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace sentinel
