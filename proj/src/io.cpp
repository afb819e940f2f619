#include "arw/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace arw {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : cols_(header.size()) {
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += header[i];
    }
    buf_ += '\n';
}

void CsvWriter::add_row(const std::vector<double>& cells) {
    if (cells.size() != cols_) throw std::runtime_error("csv: column count mismatch");
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += fmt17(cells[i]);
    }
    buf_ += '\n';
}

void CsvWriter::add_row_raw(const std::vector<std::string>& cells) {
    if (cells.size() != cols_) throw std::runtime_error("csv: column count mismatch");
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += cells[i];
    }
    buf_ += '\n';
}

void CsvWriter::write_file(const std::filesystem::path& path) const { write_text_file(path, buf_); }

void write_cloud_csv(const SampleCloud& cloud, const std::filesystem::path& path) {
    std::vector<std::string> header;
    for (int j = 1; j <= cloud.d; ++j) header.push_back("x" + std::to_string(j));
    CsvWriter csv(std::move(header));
    std::vector<double> row(static_cast<size_t>(cloud.d));
    for (int64_t i = 0; i < cloud.n; ++i) {
        const double* r = cloud.row(i);
        for (int j = 0; j < cloud.d; ++j) row[static_cast<size_t>(j)] = r[j];
        csv.add_row(row);
    }
    csv.write_file(path);

    nlohmann::json meta;
    meta["model_hash"] = cloud.meta.model_hash;
    meta["seed"] = cloud.meta.seed;
    meta["trunc_tol"] = cloud.meta.trunc_tol;
    meta["kmax_hits"] = cloud.meta.kmax_hits;
    meta["biased"] = cloud.meta.biased;
    meta["n"] = cloud.n;
    meta["d"] = cloud.d;
    std::filesystem::path mp = path;
    mp += ".meta.json";
    write_text_file(mp, meta.dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string file_checksum_hex(const std::filesystem::path& path) {
    const std::string bytes = read_text_file(path);
    uint64_t h = 0xcbf29ce484222325ull;
    for (const char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

}  // namespace arw
