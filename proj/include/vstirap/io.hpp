#pragma once

// Comma-separated output with a '#'-prefixed metadata header that records
// the artifact version and the fully resolved configuration of the run.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include "vstirap/common.hpp"

namespace vstirap {

inline void write_csv(const std::string& path, const std::vector<std::string>& meta,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path);
  if (!f) throw std::ios_base::failure("cannot write " + path);
  f << "# vstirap " << kVersion << "\n";
  for (const auto& m : meta) f << "# " << m << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    f << (i ? "," : "") << columns[i];
  f << "\n";
  f << std::setprecision(12);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
  if (!f) throw std::ios_base::failure("write failed: " + path);
}

}  // namespace vstirap
