#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "arw/cloud.hpp"

namespace arw {

/// Format a double with 17 significant digits ('.' decimal, no locale).
std::string fmt17(double v);

/// Minimal RFC-4180 CSV writer: fixed column count, 17-significant-digit
/// numeric cells, '\n' line endings. Output is byte-stable for equal inputs.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(const std::vector<double>& cells);
    void add_row_raw(const std::vector<std::string>& cells);
    const std::string& str() const { return buf_; }
    void write_file(const std::filesystem::path& path) const;

private:
    size_t cols_;
    std::string buf_;
};

/// Cloud export: one row per sample, header "x1,...,xd"; meta sidecar JSON
/// at <path>.meta.json.
void write_cloud_csv(const SampleCloud& cloud, const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// FNV-1a checksum of a file's bytes, hex-encoded (report aggregation).
std::string file_checksum_hex(const std::filesystem::path& path);

}  // namespace arw
