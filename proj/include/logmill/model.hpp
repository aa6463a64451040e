#pragma once

// Domain types and the template algebra shared by every other module:
// whitespace tokenization, placeholder normalization, token alignment of
// semantic templates, and the loose/strict match predicates.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logmill/errors.hpp"

namespace logmill {

using LineId = std::int64_t;
using ClusterId = std::int64_t;

inline constexpr std::string_view kWildcard = "<*>";

struct RawLogRecord {
  LineId line_id = 0;
  std::string raw;
  std::string content;
};

struct TokenizedLog {
  RawLogRecord record;
  std::vector<std::string> tokens;
};

enum class VariableCategory { OID, LOI, OBN, TID, SID, TDA, CRS, OBA, STC, OTP };

struct CategoryInfo {
  VariableCategory category;
  std::string_view code;
  std::string_view name;
  std::string_view description;
};

inline constexpr std::array<CategoryInfo, 10> kCategories{{
    {VariableCategory::OID, "OID", "Object ID", "Includes variables like session IDs and user IDs."},
    {VariableCategory::LOI, "LOI", "Location Indicator", "Path information, URIs, and IP addresses."},
    {VariableCategory::OBN, "OBN", "Object Name", "Domain names, task names, job names."},
    {VariableCategory::TID, "TID", "Type Indicator", "Category for type indicators."},
    {VariableCategory::SID, "SID", "Switch Indicator", "Category for switch indicators (only numerical ones)."},
    {VariableCategory::TDA, "TDA", "Time/Duration of an Action", "Timespan or duration of actions."},
    {VariableCategory::CRS, "CRS", "Computing Resources", "Memory, disk space, number of bytes."},
    {VariableCategory::OBA, "OBA", "Object Amount", "Number of errors, nodes, etc."},
    {VariableCategory::STC, "STC", "Status Code", "Error codes (only numerical ones)."},
    {VariableCategory::OTP, "OTP", "Other Parameters", "All other types of variables."},
}};

inline std::string_view category_code(VariableCategory c) {
  return kCategories[static_cast<std::size_t>(c)].code;
}

inline std::optional<VariableCategory> parse_category(std::string_view code) {
  for (const auto& info : kCategories) {
    if (info.code == code) return info.category;
  }
  return std::nullopt;
}

// Semantic template as produced by the extractor, after normalization. One
// `<*>` may stand for several raw tokens.
struct LogTemplate {
  std::string text;
  std::size_t placeholder_count = 0;
  // Nothing but placeholders survived normalization; retained but flagged.
  bool all_variable = false;

  friend bool operator==(const LogTemplate& a, const LogTemplate& b) { return a.text == b.text; }
};

// Token-aligned template: exactly one entry per raw token.
struct SyntaxTemplate {
  std::vector<std::string> entries;

  std::size_t token_count() const noexcept { return entries.size(); }
  friend bool operator==(const SyntaxTemplate&, const SyntaxTemplate&) = default;
};

enum class MatchKind { Strict, Loose, None };

inline constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

inline bool has_wildcard(std::string_view s) noexcept {
  return s.find(kWildcard) != std::string_view::npos;
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

inline std::vector<std::string> tokenize(std::string_view content) {
  auto tokens = split_whitespace(content);
  if (tokens.empty()) throw EmptyContent("log content is empty");
  return tokens;
}

inline TokenizedLog tokenize(RawLogRecord record) {
  auto tokens = tokenize(record.content);
  return TokenizedLog{std::move(record), std::move(tokens)};
}

inline std::string join_tokens(std::span<const std::string> tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

namespace detail {

inline bool is_category_placeholder(std::string_view inner) {
  return inner == "*" || inner == "XXX" || parse_category(inner).has_value();
}

}  // namespace detail

// Rewrites category tokens (`<OID>`, `<XXX>`, ...) to `<*>`, collapses
// placeholders separated only by whitespace, and collapses whitespace runs.
inline LogTemplate normalize_template(std::string_view llm_output) {
  const auto words = split_whitespace(llm_output);
  if (words.empty()) throw EmptyContent("template is empty");
  const std::string spaced = join_tokens(words);

  std::string replaced;
  replaced.reserve(spaced.size());
  for (std::size_t i = 0; i < spaced.size();) {
    if (spaced[i] == '<') {
      const auto close = spaced.find('>', i + 1);
      if (close != std::string::npos) {
        const std::string_view inner(spaced.data() + i + 1, close - i - 1);
        if (detail::is_category_placeholder(inner)) {
          replaced += kWildcard;
          i = close + 1;
          continue;
        }
      }
    }
    replaced += spaced[i++];
  }

  LogTemplate out;
  out.text.reserve(replaced.size());
  for (std::size_t i = 0; i < replaced.size();) {
    if (replaced.compare(i, kWildcard.size(), kWildcard) == 0) {
      out.text += kWildcard;
      ++out.placeholder_count;
      i += kWildcard.size();
      // Swallow any following placeholders reachable across whitespace only.
      for (;;) {
        std::size_t j = i;
        while (j < replaced.size() && replaced[j] == ' ') ++j;
        if (replaced.compare(j, kWildcard.size(), kWildcard) == 0) {
          i = j + kWildcard.size();
        } else {
          break;
        }
      }
      continue;
    }
    out.text += replaced[i++];
  }

  std::string rest = out.text;
  for (auto pos = rest.find(kWildcard); pos != std::string::npos; pos = rest.find(kWildcard)) {
    rest.erase(pos, kWildcard.size());
  }
  out.all_variable = trim(rest).empty();
  return out;
}

// At least one whitespace token free of placeholders.
inline bool has_static_token(std::string_view template_text) {
  const auto words = split_whitespace(template_text);
  return std::any_of(words.begin(), words.end(), [](const std::string& w) { return !has_wildcard(w); });
}

inline std::vector<std::string_view> split_on_wildcard(std::string_view pattern) {
  std::vector<std::string_view> pieces;
  std::size_t start = 0;
  for (auto pos = pattern.find(kWildcard); pos != std::string_view::npos;
       pos = pattern.find(kWildcard, start)) {
    pieces.push_back(pattern.substr(start, pos - start));
    start = pos + kWildcard.size();
  }
  pieces.push_back(pattern.substr(start));
  return pieces;
}

// Anchored match of `token` against `pattern`, where each `<*>` stands for a
// non-empty character run and everything else is literal.
inline bool wildcard_match(std::string_view pattern, std::string_view token) {
  if (!has_wildcard(pattern)) return pattern == token;
  const auto pieces = split_on_wildcard(pattern);
  const std::string_view head = pieces.front();
  const std::string_view tail = pieces.back();
  if (!token.starts_with(head)) return false;
  std::size_t pos = head.size();
  for (std::size_t i = 1; i + 1 < pieces.size(); ++i) {
    pos += 1;
    if (pos > token.size()) return false;
    const auto found = token.find(pieces[i], pos);
    if (found == std::string_view::npos) return false;
    pos = found + pieces[i].size();
  }
  return token.size() >= pos + 1 + tail.size() && token.ends_with(tail);
}

inline bool loose_match(const SyntaxTemplate& st, std::span<const std::string> tokens) {
  if (st.entries.size() != tokens.size()) return false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (st.entries[i] != tokens[i] && !has_wildcard(st.entries[i])) return false;
  }
  return true;
}

inline bool strict_match(const SyntaxTemplate& st, std::span<const std::string> tokens) {
  if (st.entries.size() != tokens.size()) return false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!wildcard_match(st.entries[i], tokens[i])) return false;
  }
  return true;
}

inline MatchKind classify(const SyntaxTemplate& st, std::span<const std::string> tokens) {
  if (!loose_match(st, tokens)) return MatchKind::None;
  return strict_match(st, tokens) ? MatchKind::Strict : MatchKind::Loose;
}

inline SyntaxTemplate wildcard_syntax_template(std::size_t token_count) {
  return SyntaxTemplate{std::vector<std::string>(token_count, std::string(kWildcard))};
}

namespace detail {

// Leftmost, shortest-span assignment of placeholder spans. Fills `variable`
// with one flag per character of `content`.
class Aligner {
 public:
  Aligner(std::string_view content, std::vector<std::string_view> pieces)
      : content_(content), pieces_(std::move(pieces)), failed_(pieces_.size() * (content.size() + 1), 0) {}

  bool run(std::vector<char>& variable) {
    variable.assign(content_.size(), 0);
    if (!content_.starts_with(pieces_.front())) return false;
    if (pieces_.size() == 1) return content_ == pieces_.front();
    return place(1, pieces_.front().size(), variable);
  }

 private:
  // Piece `index` is preceded by a placeholder starting at `pos`.
  bool place(std::size_t index, std::size_t pos, std::vector<char>& variable) {
    const std::size_t key = index * (content_.size() + 1) + pos;
    if (failed_[key]) return false;
    const std::string_view piece = pieces_[index];
    const bool last = index + 1 == pieces_.size();
    if (last) {
      if (content_.size() >= pos + 1 + piece.size() && content_.ends_with(piece)) {
        mark(pos, content_.size() - piece.size(), variable);
        return true;
      }
      failed_[key] = 1;
      return false;
    }
    for (std::size_t end = content_.find(piece, pos + 1); end != std::string_view::npos;
         end = content_.find(piece, end + 1)) {
      if (place(index + 1, end + piece.size(), variable)) {
        mark(pos, end, variable);
        return true;
      }
    }
    failed_[key] = 1;
    return false;
  }

  static void mark(std::size_t from, std::size_t to, std::vector<char>& variable) {
    std::fill(variable.begin() + static_cast<std::ptrdiff_t>(from),
              variable.begin() + static_cast<std::ptrdiff_t>(to), 1);
  }

  std::string_view content_;
  std::vector<std::string_view> pieces_;
  std::vector<char> failed_;
};

}  // namespace detail

// Lays the semantic template over the raw tokens. Each token becomes its
// verbatim text, `<*>`, or a mixed pattern such as `blk_<*>`. Throws
// AlignmentError when the static text cannot be placed.
inline SyntaxTemplate derive_syntax_template(std::span<const std::string> tokens, const LogTemplate& tmpl) {
  const std::string content = join_tokens(tokens);
  std::vector<char> variable;
  detail::Aligner aligner(content, split_on_wildcard(tmpl.text));
  if (!aligner.run(variable)) throw AlignmentError(content, tmpl.text);

  SyntaxTemplate st;
  st.entries.reserve(tokens.size());
  std::size_t offset = 0;
  for (const auto& token : tokens) {
    std::string entry;
    bool in_run = false;
    for (std::size_t i = 0; i < token.size(); ++i) {
      if (variable[offset + i]) {
        if (!in_run) entry += kWildcard;
        in_run = true;
      } else {
        entry += token[i];
        in_run = false;
      }
    }
    st.entries.push_back(std::move(entry));
    offset += token.size() + 1;
  }
  return st;
}

}  // namespace logmill
