#include "hystloop/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "hystloop/errors.hpp"

namespace hystloop {

namespace fs = std::filesystem;

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ParameterError("missing column: " + name);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}

namespace {

void atomic_write(const fs::path& path, const std::string& body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << body;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + " (" + ec.message() + ")");
}

double parse_field(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw IoError("malformed CSV number '" + field + "' at line " + std::to_string(line_no));
  return value;
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns) {
  if (header.size() != columns.size())
    throw ParameterError("write_csv: header/column count mismatch");
  if (columns.empty()) throw ParameterError("write_csv: no columns");
  const std::size_t rows = columns.front()->size();
  for (const auto* col : columns)
    if (col->size() != rows) throw ParameterError("write_csv: column length mismatch");

  std::ostringstream body;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) body << ',';
    body << header[i];
  }
  body << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) body << ',';
      body << format_double((*columns[c])[r]);
    }
    body << '\n';
  }
  atomic_write(path, body.str());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());

  CsvTable table;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw IoError("empty CSV: " + path.string());
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) table.header.push_back(field);
  }
  if (table.header.empty()) throw IoError("malformed CSV header at line 1");
  table.columns.resize(table.header.size());

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::size_t col = 0;
    while (std::getline(ss, field, ',')) {
      if (col >= table.columns.size())
        throw IoError("too many fields at line " + std::to_string(line_no));
      table.columns[col].push_back(parse_field(field, line_no));
      ++col;
    }
    if (col != table.columns.size())
      throw IoError("expected " + std::to_string(table.columns.size()) + " fields, got " +
                    std::to_string(col) + " at line " + std::to_string(line_no));
  }
  return table;
}

void write_trace_csv(const fs::path& path, const SignalTrace& trace) {
  std::vector<double> time(trace.samples.size());
  for (std::size_t i = 0; i < time.size(); ++i) time[i] = static_cast<double>(i) * trace.dt;
  const std::string label = trace.label.empty() ? "x" : trace.label;
  write_csv(path, {"t", label}, {&time, &trace.samples});
}

}  // namespace hystloop
