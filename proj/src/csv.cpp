#include "cfdr/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <unistd.h>

#include "cfdr/errors.hpp"

namespace cfdr {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw Error("failed to format double");
    return std::string(buf, ptr);
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ParseError("missing column '" + std::string(name) + "'", 1);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ParseError(path + ": row " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                                 " fields, expected " + std::to_string(table.header.size()),
                             lineno);
        }
        table.rows.push_back(CsvRow{lineno, std::move(fields)});
    }
    if (table.header.empty()) throw ParseError(path + ": empty file", 1);
    return table;
}

double parse_double_field(const std::string& field, std::size_t line) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first < last && *first == ' ') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw ParseError("row " + std::to_string(line) + ": invalid number '" + field + "'", line);
    }
    return v;
}

std::size_t parse_index_field(const std::string& field, std::size_t line) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("row " + std::to_string(line) + ": invalid index '" + field + "'", line);
    }
    return v;
}

AtomicFile::AtomicFile(std::filesystem::path path) : path_(std::move(path)) {
    tmp_ = path_;
    tmp_ += ".tmp." + std::to_string(::getpid());
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error("cannot write '" + tmp_.string() + "'");
}

AtomicFile::~AtomicFile() {
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_, ec);
    }
}

void AtomicFile::commit() {
    out_.flush();
    if (!out_) throw Error("write failed for '" + tmp_.string() + "'");
    out_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    AtomicFile f(path);
    f.stream() << contents;
    f.commit();
}

}  // namespace cfdr
