#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "logmill/errors.hpp"
#include "logmill/model.hpp"

namespace logmill {

struct MergeDecision {
  bool answer = false;
  std::optional<LogTemplate> unified_template;
  std::string reason;
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    out.push_back(text.substr(start, end - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

inline std::string drop_fence_lines(std::string_view text) {
  std::string out;
  for (auto line : lines_of(text)) {
    if (trim(line).starts_with("```")) continue;
    out += line;
    out += '\n';
  }
  return out;
}

inline std::string_view strip_quotes(std::string_view s) {
  s = trim(s);
  while (s.size() >= 2) {
    const char a = s.front();
    const char b = s.back();
    if ((a == '"' && b == '"') || (a == '\'' && b == '\'') || (a == '`' && b == '`')) {
      s = trim(s.substr(1, s.size() - 2));
    } else {
      break;
    }
  }
  return s;
}

// Value of the last line beginning with `label` (case-insensitive).
inline std::optional<std::string> labeled_value(std::string_view text, std::string_view label) {
  std::optional<std::string> found;
  const std::string want = lower(label);
  for (auto line : lines_of(text)) {
    auto t = trim(line);
    while (!t.empty() && (t.front() == '*' || t.front() == '#')) t = trim(t.substr(1));
    if (lower(t.substr(0, want.size())) == want) found = std::string(trim(t.substr(want.size())));
  }
  return found;
}

inline std::optional<bool> yes_no(std::string_view value) {
  std::string v = lower(strip_quotes(value));
  while (!v.empty() && !std::isalpha(static_cast<unsigned char>(v.front()))) v.erase(v.begin());
  const auto word = [&](std::string_view w) {
    return v.starts_with(w) && (v.size() == w.size() || !std::isalpha(static_cast<unsigned char>(v[w.size()])));
  };
  if (word("yes")) return true;
  if (word("no")) return false;
  return std::nullopt;
}

}  // namespace detail

// First non-empty line after the last "Parsed Log:" marker, or of the whole
// response when no marker is present. Code fences and enclosing quotes are
// removed.
inline std::string parse_extraction_response(std::string_view text) {
  static constexpr std::string_view kMarker = "parsed log:";
  const std::string lowered = detail::lower(text);
  const auto marker = lowered.rfind(kMarker);
  const std::string body =
      detail::drop_fence_lines(marker == std::string::npos ? text : text.substr(marker + kMarker.size()));
  std::string picked;
  for (auto line : detail::lines_of(body)) {
    if (!trim(line).empty()) {
      picked = std::string(line);
      break;
    }
  }
  std::string result(detail::strip_quotes(picked));
  if (result.empty()) throw EmptyExtraction("extractor returned no template");
  return result;
}

inline MergeDecision parse_merge_response(std::string_view text) {
  const auto answer_line = detail::labeled_value(text, "Answer:");
  if (!answer_line) throw MergeParseError("merge response has no Answer line");
  const auto answer = detail::yes_no(*answer_line);
  if (!answer) throw MergeParseError("merge answer is neither yes nor no: " + *answer_line);

  MergeDecision decision;
  decision.reason = detail::labeled_value(text, "Reason:").value_or("");
  if (!*answer) return decision;

  const auto unified = detail::labeled_value(text, "Unified Template:");
  const std::string_view value = unified ? detail::strip_quotes(*unified) : std::string_view{};
  if (value.empty() || detail::lower(value) == "none") {
    decision.reason = "answered yes without a unified template";
    return decision;
  }
  LogTemplate tmpl = normalize_template(value);
  if (!has_static_token(tmpl.text)) {
    decision.reason = "unified template has no static part: " + tmpl.text;
    return decision;
  }
  decision.answer = true;
  decision.unified_template = std::move(tmpl);
  return decision;
}

// Unparseable verdicts count as "no".
inline bool parse_check_response(std::string_view text) {
  if (const auto answer = detail::labeled_value(text, "Answer:")) {
    if (const auto v = detail::yes_no(*answer)) return *v;
  }
  return detail::yes_no(trim(text)).value_or(false);
}

}  // namespace logmill
