#pragma once

// RFC 4180 CSV reading and writing, plus the structured result format
// (LineId, Content, EventId, EventTemplate) used for parser output and
// ground truth.

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "logmill/errors.hpp"
#include "logmill/metrics.hpp"
#include "logmill/model.hpp"

namespace logmill {

using CsvRow = std::vector<std::string>;

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;

  // Index of a header column, or -1.
  int column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

inline std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // UTF-8 BOM
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          quoted = true;
          field_started = true;
        } else {
          field += c;
        }
        break;
      case ',': end_field(); break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_row();
        break;
      case '\n': end_row(); break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw DatasetCorrupt("unterminated quoted CSV field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline CsvTable read_csv_table(const std::filesystem::path& path) {
  auto rows = parse_csv(read_file(path));
  CsvTable t;
  if (rows.empty()) return t;
  t.header = std::move(rows.front());
  t.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
  return t;
}

inline std::string csv_escape(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                            (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_csv_row(std::ostream& out, const CsvRow& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(row[i]);
  }
  out << '\n';
}

struct StructuredRow {
  LineId line_id = 0;
  std::string content;
  std::string event_id;
  std::string event_template;
};

inline const CsvRow kStructuredHeader{"LineId", "Content", "EventId", "EventTemplate"};

inline std::vector<StructuredRow> read_structured_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv_table(path);
  const int li = t.column("LineId");
  const int ci = t.column("Content");
  const int ei = t.column("EventId");
  const int ti = t.column("EventTemplate");
  if (li < 0 || ci < 0 || ei < 0 || ti < 0) {
    throw DatasetCorrupt(path.string() + ": header must contain LineId, Content, EventId, EventTemplate");
  }
  std::vector<StructuredRow> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != t.header.size()) {
      throw DatasetCorrupt(path.string() + ": row " + std::to_string(r + 2) + " has " +
                           std::to_string(row.size()) + " fields, expected " + std::to_string(t.header.size()));
    }
    StructuredRow s;
    try {
      std::size_t used = 0;
      s.line_id = std::stoll(row[li], &used);
      if (used != row[li].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw DatasetCorrupt(path.string() + ": row " + std::to_string(r + 2) + " has a bad LineId '" + row[li] + "'");
    }
    s.content = row[ci];
    s.event_id = row[ei];
    s.event_template = row[ti];
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_structured_csv(std::ostream& out, const std::vector<StructuredRow>& rows) {
  write_csv_row(out, kStructuredHeader);
  for (const auto& r : rows) write_csv_row(out, {std::to_string(r.line_id), r.content, r.event_id, r.event_template});
}

// Groups by EventId; a group's template is taken from its last row.
inline ParsingResult to_parsing_result(const std::vector<StructuredRow>& rows) {
  ParsingResult r;
  for (const auto& row : rows) {
    if (r.assignment.count(row.line_id)) throw DatasetCorrupt("duplicate LineId " + std::to_string(row.line_id));
    r.add(row.line_id, row.event_id, row.event_template);
  }
  return r;
}

inline ParsingResult read_parsing_result(const std::filesystem::path& path) {
  return to_parsing_result(read_structured_csv(path));
}

}  // namespace logmill
