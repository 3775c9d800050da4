// io.hpp — CSV artifacts with `#` comment headers (tool version, config hash)
// and atomic file writes via temp-file rename.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "thlab/util.hpp"
#include "thlab/version.hpp"

namespace thlab {

// Field values never contain commas or newlines by construction (numbers and
// short tags only), so no quoting is needed.
struct CsvDocument {
  std::vector<std::string> comments;  // emitted as "# <line>"
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const {
    std::ostringstream os;
    for (const auto& c : comments) os << "# " << c << '\n';
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
      if (row.size() != columns.size()) throw std::logic_error("CsvDocument: row width mismatch");
      for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << '\n';
    }
    return os.str();
  }
};

inline std::vector<std::string> standard_csv_comments(const std::string& command, uint64_t config_hash) {
  return {std::string(kToolName) + " v" + kToolVersion, "command=" + command,
          "config_hash=" + hex64(config_hash)};
}

inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace thlab
