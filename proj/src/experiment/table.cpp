#include "siir/experiment/table.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "siir/experiment/config.hpp"

namespace siir::experiment {

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "jsonl") return Format::jsonl;
  throw ConfigError("format: must be 'csv' or 'jsonl'");
}

std::string fixed(double value, int decimals) {
  if (!std::isfinite(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string sci(double value) {
  if (!std::isfinite(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10e", value);
  return buf;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

TableWriter::TableWriter(std::ostream& out, Format format, std::vector<std::string> columns)
    : out_(out), format_(format), columns_(std::move(columns)) {}

TableWriter::~TableWriter() {
  if (!finished_) {
    try {
      finish(false);
    } catch (...) {
    }
  }
}

void TableWriter::meta(const std::string& key, const std::string& value) {
  if (format_ == Format::csv) {
    out_ << "# " << key << '=' << value << '\n';
  } else {
    out_ << "{\"meta\":{" << json_string(key) << ':' << json_string(value) << "}}\n";
  }
}

void TableWriter::write_header() {
  header_written_ = true;
  if (format_ != Format::csv) return;
  for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
  out_ << '\n';
}

void TableWriter::row(const std::vector<Cell>& cells) {
  if (!header_written_) write_header();
  if (format_ == Format::csv) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << csv_escape(cells[i].text);
    out_ << '\n';
  } else {
    out_ << '{';
    for (std::size_t i = 0; i < cells.size() && i < columns_.size(); ++i) {
      out_ << (i ? "," : "") << json_string(columns_[i]) << ':';
      if (cells[i].text.empty()) {
        out_ << "null";
      } else if (cells[i].numeric && cells[i].text != "nan") {
        out_ << cells[i].text;
      } else {
        out_ << json_string(cells[i].text);
      }
    }
    out_ << "}\n";
  }
  out_.flush();
}

void TableWriter::finish(bool complete) {
  if (finished_) return;
  if (!header_written_) write_header();
  finished_ = true;
  if (format_ == Format::csv) {
    out_ << "# status=" << (complete ? "complete" : "incomplete") << '\n';
  } else {
    out_ << "{\"status\":\"" << (complete ? "complete" : "incomplete") << "\"}\n";
  }
  out_.flush();
}

}  // namespace siir::experiment
