#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace cfdr {

// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_double(double v);

struct CsvRow {
    std::size_t line = 0;  // 1-based line in the source file
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;

    // Index of a header column; throws ParseError(line 1) if missing.
    std::size_t column(std::string_view name) const;
};

// Reads a comma-separated file with a header line. Rows whose field count
// differs from the header raise ParseError carrying the row's line number.
CsvTable read_csv(const std::string& path);

double parse_double_field(const std::string& field, std::size_t line);
std::size_t parse_index_field(const std::string& field, std::size_t line);

// Writes to a sibling temporary file and renames it over `path` on commit().
// If destroyed uncommitted the temporary is removed and `path` is untouched.
class AtomicFile {
public:
    explicit AtomicFile(std::filesystem::path path);
    AtomicFile(const AtomicFile&) = delete;
    AtomicFile& operator=(const AtomicFile&) = delete;
    ~AtomicFile();

    std::ostream& stream() { return out_; }
    void commit();

private:
    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace cfdr
