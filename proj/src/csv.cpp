#include "sentinel/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sentinel/errors.hpp"

namespace sentinel {

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        std::string field = line.substr(start, pos == std::string::npos ? pos : pos - start);
        // Trim surrounding whitespace and a possible trailing CR.
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ' || field.back() == '\t'))
            field.pop_back();
        std::size_t lead = field.find_first_not_of(" \t");
        out.push_back(lead == std::string::npos ? std::string() : field.substr(lead));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open file '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw_data("file '" + path + "' is empty");
    table.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        table.rows.push_back(split_csv_line(line));
    }
    return table;
}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw_data("cannot write file '" + tmp.string() + "'");
        out << content;
        if (!out) throw_data("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw_data("cannot rename '" + tmp.string() + "' to '" + path + "': " + ec.message());
}

} // namespace sentinel
