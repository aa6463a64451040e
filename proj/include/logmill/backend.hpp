#pragma once

// Template-extraction backends. Every backend answers the three request kinds
// with raw response text; parsing is shared. Chat-style backends only see the
// prompt, the ground-truth oracle only sees the structured arguments.

#include <fstream>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "logmill/errors.hpp"
#include "logmill/model.hpp"
#include "logmill/sha256.hpp"

namespace logmill {

class ExtractionBackend {
 public:
  virtual ~ExtractionBackend() = default;
  virtual std::string extraction_response(std::string_view log, const std::string& prompt) = 0;
  virtual std::string merge_verify_response(std::span<const std::string> logs, const std::string& prompt) = 0;
  virtual std::string merge_check_response(std::string_view tmpl, std::span<const std::string> logs,
                                           const std::string& prompt) = 0;
};

class ChatBackend : public ExtractionBackend {
 public:
  virtual std::string complete(const std::string& prompt) = 0;

  std::string extraction_response(std::string_view, const std::string& prompt) override { return complete(prompt); }
  std::string merge_verify_response(std::span<const std::string>, const std::string& prompt) override {
    return complete(prompt);
  }
  std::string merge_check_response(std::string_view, std::span<const std::string>,
                                   const std::string& prompt) override {
    return complete(prompt);
  }
};

// Answers from a labeled content -> template map.
class OracleBackend final : public ExtractionBackend {
 public:
  // Returns false when `content` already carries a different label; the first
  // label is kept and the conflict counted.
  bool add(std::string content, std::string tmpl) {
    const auto [it, inserted] = labels_.emplace(std::move(content), tmpl);
    if (!inserted && it->second != tmpl) {
      ++conflicts_;
      return false;
    }
    return true;
  }

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t conflicts() const noexcept { return conflicts_; }

  const std::string* lookup(std::string_view content) const {
    const auto it = labels_.find(std::string(content));
    return it == labels_.end() ? nullptr : &it->second;
  }

  std::string extraction_response(std::string_view log, const std::string&) override {
    return "Parsed Log: " + label_of(log);
  }

  std::string merge_verify_response(std::span<const std::string> logs, const std::string&) override {
    std::string out;
    std::optional<std::string> shared;
    bool same = !logs.empty();
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const std::string* label = lookup(logs[i]);
      const std::string norm = label ? normalize_template(*label).text : std::string();
      out += "EventTemplate_" + std::to_string(i + 1) + ": " + (label ? *label : std::string("unknown")) + "\n";
      if (!label || (shared && *shared != norm)) same = false;
      if (!shared) shared = norm;
    }
    if (same) {
      out += "Reason: identical ground-truth template\nAnswer: Yes\nUnified Template: " + *shared;
    } else {
      out += "Reason: different ground-truth templates\nAnswer: No\nUnified Template: None";
    }
    return out;
  }

  std::string merge_check_response(std::string_view tmpl, std::span<const std::string> logs,
                                   const std::string&) override {
    const std::string want = normalize_template(tmpl).text;
    for (const auto& log : logs) {
      const std::string* label = lookup(log);
      if (!label || normalize_template(*label).text != want) return "Answer: No";
    }
    return "Answer: Yes";
  }

 private:
  const std::string& label_of(std::string_view log) const {
    const std::string* label = lookup(log);
    if (!label) throw OracleMiss("no ground-truth label for log: " + std::string(log));
    return *label;
  }

  std::unordered_map<std::string, std::string> labels_;
  std::size_t conflicts_ = 0;
};

// One replay line: {"request_hash": sha256(prompt), "response_text": ...}.
inline std::string replay_line(std::string_view prompt, std::string_view response) {
  nlohmann::json j{{"request_hash", sha256_hex(prompt)}, {"response_text", response}};
  return j.dump();
}

class ReplayBackend final : public ChatBackend {
 public:
  static ReplayBackend from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetCorrupt("cannot open replay file " + path);
    ReplayBackend replay;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        replay.add(j.at("request_hash").get<std::string>(), j.at("response_text").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw DatasetCorrupt(path + ":" + std::to_string(lineno) + ": bad replay record: " + e.what());
      }
    }
    return replay;
  }

  void add(std::string request_hash, std::string response) {
    responses_.emplace(std::move(request_hash), std::move(response));
  }
  std::size_t size() const noexcept { return responses_.size(); }

  std::string complete(const std::string& prompt) override {
    const auto hash = sha256_hex(prompt);
    const auto it = responses_.find(hash);
    if (it == responses_.end()) throw ReplayMiss("no recorded response for request " + hash);
    return it->second;
  }

 private:
  std::unordered_map<std::string, std::string> responses_;
};

// Forwards to `inner` and appends every new (prompt hash, response) pair to a
// replay file.
class RecordingBackend final : public ExtractionBackend {
 public:
  RecordingBackend(std::shared_ptr<ExtractionBackend> inner, const std::string& path)
      : inner_(std::move(inner)), out_(path, std::ios::app) {
    if (!out_) throw Error("cannot open replay file for writing: " + path);
  }

  std::string extraction_response(std::string_view log, const std::string& prompt) override {
    return record(prompt, inner_->extraction_response(log, prompt));
  }
  std::string merge_verify_response(std::span<const std::string> logs, const std::string& prompt) override {
    return record(prompt, inner_->merge_verify_response(logs, prompt));
  }
  std::string merge_check_response(std::string_view tmpl, std::span<const std::string> logs,
                                   const std::string& prompt) override {
    return record(prompt, inner_->merge_check_response(tmpl, logs, prompt));
  }

 private:
  std::string record(const std::string& prompt, std::string response) {
    std::lock_guard lock(mutex_);
    if (seen_.insert(sha256_hex(prompt)).second) {
      out_ << replay_line(prompt, response) << '\n';
      out_.flush();
    }
    return response;
  }

  std::shared_ptr<ExtractionBackend> inner_;
  std::ofstream out_;
  std::mutex mutex_;
  std::unordered_set<std::string> seen_;
};

}  // namespace logmill
