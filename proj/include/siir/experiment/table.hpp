#pragma once

// Streaming result tables. CSV output puts metadata on '#' lines; JSON-lines
// output uses {"meta": ...} objects. Both end with a status trailer so a
// truncated file is recognizable.

#include <ostream>
#include <string>
#include <vector>

namespace siir::experiment {

enum class Format { csv, jsonl };

Format parse_format(const std::string& name);

struct Cell {
  std::string text;
  bool numeric = false;

  static Cell num(std::string t) { return {std::move(t), true}; }
  static Cell str(std::string t) { return {std::move(t), false}; }
};

// Fixed-point text with `decimals` places; "-0.0000" is normalized to "0.0000".
std::string fixed(double value, int decimals);
// Shortest round-trip-safe scientific form.
std::string sci(double value);

class TableWriter {
 public:
  TableWriter(std::ostream& out, Format format, std::vector<std::string> columns);
  ~TableWriter();

  TableWriter(const TableWriter&) = delete;
  TableWriter& operator=(const TableWriter&) = delete;

  // Metadata emitted before the header are buffered until the first row.
  void meta(const std::string& key, const std::string& value);
  void row(const std::vector<Cell>& cells);
  // Writes the trailer. Without it the destructor marks the table incomplete.
  void finish(bool complete = true);

 private:
  void write_header();

  std::ostream& out_;
  Format format_;
  std::vector<std::string> columns_;
  bool header_written_ = false;
  bool finished_ = false;
};

}  // namespace siir::experiment
