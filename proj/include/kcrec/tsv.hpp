#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kcrec {

struct TsvRow {
    std::vector<std::string> fields;
    int line = 0;  // 1-based line number in the source file
};

struct TsvFile {
    std::string path;
    std::vector<std::string> header;
    std::vector<TsvRow> rows;
};

// Reads a UTF-8, tab-delimited file. With `with_header` the first
// non-empty line is treated as the header row and is required.
TsvFile read_tsv(const std::string& path, bool with_header);

// Writes `content` to `path` atomically: temp file in the same
// directory, then rename. Parent directories are created.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string join_tsv(const std::vector<std::string>& fields);

// Fixed-width decimal formatting for report files.
std::string format_double(double v, int precision = 6);

}  // namespace kcrec
