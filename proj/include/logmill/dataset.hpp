#pragma once

// loghub-style dataset loading and calibration sampling.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <regex>
#include <string>
#include <vector>

#include "logmill/csv.hpp"
#include "logmill/errors.hpp"
#include "logmill/model.hpp"

namespace logmill {

struct DatasetSpec {
  std::string name;
  std::filesystem::path log_path;
  std::filesystem::path structured_path;
  std::filesystem::path templates_path;  // optional
  std::string log_format;                // e.g. "<Date> <Time> <Level> <Content>"
};

// Compiled header pattern. Literal fragments are regular expressions with
// runs of spaces widened to \s+; each <Field> becomes a lazy capture.
class LogFormat {
 public:
  explicit LogFormat(std::string_view format) {
    std::string pattern = "^";
    std::size_t pos = 0;
    while (pos < format.size()) {
      const auto open = format.find('<', pos);
      std::size_t close = open == std::string_view::npos ? open : format.find('>', open + 1);
      if (open != std::string_view::npos && close != std::string_view::npos &&
          format.substr(open + 1, close - open - 1).find('<') != std::string_view::npos) {
        close = std::string_view::npos;
      }
      if (open == std::string_view::npos || close == std::string_view::npos) {
        pattern += literal(format.substr(pos));
        break;
      }
      pattern += literal(format.substr(pos, open - pos));
      headers_.emplace_back(format.substr(open + 1, close - open - 1));
      pattern += "(.*?)";
      pos = close + 1;
    }
    pattern += "$";
    content_index_ = -1;
    for (std::size_t i = 0; i < headers_.size(); ++i) {
      if (headers_[i] == "Content") content_index_ = static_cast<int>(i);
    }
    if (content_index_ < 0) throw Error("log format '" + std::string(format) + "' has no <Content> field", true);
    try {
      regex_ = std::regex(pattern, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error("log format '" + std::string(format) + "' does not compile: " + e.what(), true);
    }
    pattern_ = std::move(pattern);
  }

  // Content of `line`, or nullopt when the header does not match.
  std::optional<std::string> content(const std::string& line) const {
    std::smatch m;
    if (!std::regex_match(line, m, regex_)) return std::nullopt;
    return m[content_index_ + 1].str();
  }

  const std::vector<std::string>& headers() const noexcept { return headers_; }
  const std::string& pattern() const noexcept { return pattern_; }

 private:
  // Groups inside literal fragments are made non-capturing so field indices
  // stay positional.
  static std::string literal(std::string_view frag) {
    std::string out;
    for (std::size_t i = 0; i < frag.size(); ++i) {
      const char c = frag[i];
      if (c == '\\' && i + 1 < frag.size()) {
        out += c;
        out += frag[++i];
      } else if (c == ' ') {
        while (i + 1 < frag.size() && frag[i + 1] == ' ') ++i;
        out += "\\s+";
      } else if (c == '(' && (i + 1 >= frag.size() || frag[i + 1] != '?')) {
        out += "(?:";
      } else {
        out += c;
      }
    }
    return out;
  }

  std::vector<std::string> headers_;
  std::string pattern_;
  std::regex regex_;
  int content_index_ = -1;
};

struct LabeledRecord {
  RawLogRecord record;
  std::string gt_template;
  std::string gt_group;
  bool header_mismatch = false;  // pattern failed; whole line used as content
};

struct Dataset {
  std::string name;
  std::vector<LabeledRecord> records;
  std::size_t header_mismatches = 0;
  std::size_t content_mismatches = 0;  // extracted content differs from the structured CSV

  ParsingResult ground_truth() const {
    ParsingResult r;
    for (const auto& l : records) r.add(l.record.line_id, l.gt_group, l.gt_template);
    return r;
  }
};

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

inline Dataset load_dataset(const DatasetSpec& spec) {
  const LogFormat format(spec.log_format);
  const auto lines = read_lines(spec.log_path);
  const auto rows = read_structured_csv(spec.structured_path);
  if (lines.size() != rows.size()) {
    throw DatasetCorrupt(spec.name + ": " + std::to_string(lines.size()) + " raw lines but " +
                         std::to_string(rows.size()) + " structured rows");
  }
  Dataset ds;
  ds.name = spec.name;
  ds.records.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    LabeledRecord l;
    l.record.line_id = rows[i].line_id;
    l.record.raw = lines[i];
    if (auto c = format.content(lines[i])) {
      l.record.content = std::move(*c);
    } else {
      l.record.content = lines[i];
      l.header_mismatch = true;
      ++ds.header_mismatches;
    }
    if (l.record.content != rows[i].content) ++ds.content_mismatches;
    l.gt_template = rows[i].event_template;
    l.gt_group = rows[i].event_id;
    ds.records.push_back(std::move(l));
  }
  return ds;
}

// Contents whose ground-truth labels disagree.
inline std::vector<std::string> label_conflicts(const Dataset& ds) {
  std::map<std::string, std::string> seen;
  std::set<std::string> conflicts;
  for (const auto& l : ds.records) {
    const auto [it, inserted] = seen.emplace(l.record.content, l.gt_template);
    if (!inserted && normalized_text(it->second) != normalized_text(l.gt_template)) conflicts.insert(it->first);
  }
  return {conflicts.begin(), conflicts.end()};
}

struct CalibrationSample {
  std::vector<LabeledRecord> pairs;
  bool short_dataset = false;  // fewer than n records in the first 10%
};

// Positions in [0, m) for n evenly spaced picks: floor((2i+1)m / 2n).
inline std::vector<std::size_t> even_spacing(std::size_t m, std::size_t n) {
  std::vector<std::size_t> idx;
  if (m == 0 || n == 0) return idx;
  if (n >= m) {
    for (std::size_t i = 0; i < m; ++i) idx.push_back(i);
    return idx;
  }
  for (std::size_t i = 0; i < n; ++i) idx.push_back(((2 * i + 1) * m) / (2 * n));
  return idx;
}

// Draws n pairs from the first 10% of the stream, evenly spaced over the
// token-length order (stable, so equal lengths keep stream order).
inline CalibrationSample sample_calibration_shots(const std::vector<LabeledRecord>& records, std::size_t n = 32) {
  CalibrationSample out;
  const std::size_t head = records.size() / 10;
  std::vector<std::size_t> order(head);
  for (std::size_t i = 0; i < head; ++i) order[i] = i;
  std::vector<std::size_t> lengths(head);
  for (std::size_t i = 0; i < head; ++i) lengths[i] = split_whitespace(records[i].record.content).size();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  out.short_dataset = head < n;
  for (const auto pos : even_spacing(head, n)) out.pairs.push_back(records[order[pos]]);
  return out;
}

}  // namespace logmill
