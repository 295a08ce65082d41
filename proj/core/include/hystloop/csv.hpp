#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hystloop/signals.hpp"

namespace hystloop {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // one vector per header entry

  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  /// Index of a named column; throws ParameterError naming the column if absent.
  std::size_t column_index(const std::string& name) const;
};

/// Shortest round-trip decimal formatting of a double.
std::string format_double(double value);

/// Writes header + columns atomically (temp file + rename). Throws IoError.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns);

/// Parses an exported CSV. Throws IoError with the offending line number on
/// malformed input.
CsvTable read_csv(const std::filesystem::path& path);

/// Single trace: header `t,<label>`, time = index * dt.
void write_trace_csv(const std::filesystem::path& path, const SignalTrace& trace);

}  // namespace hystloop
