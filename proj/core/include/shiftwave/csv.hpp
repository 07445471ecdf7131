#pragma once

#include <string>
#include <vector>

namespace shiftwave {

/// Fixed formatting for all emitted CSVs: 12 significant digits, '.' decimal
/// separator, '\n' line endings. Identical inputs give byte-identical files.
std::string fmt_g12(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);

/// Minimal CSV reader for our own outputs (no quoting/escaping).
CsvTable read_csv(const std::string& path);

}  // namespace shiftwave
