#pragma once

// Prompt builders: variable-aware extraction with k-shot demonstrations,
// merge verification, merge checking, and the fine-tuning record layout.
// The static scaffolding is fixed byte-for-byte; golden copies live under
// tests/golden/.

#include <span>
#include <string>
#include <string_view>

#include "logmill/example_pool.hpp"
#include "logmill/model.hpp"

namespace logmill::prompts {

inline std::string task_instruction() {
  std::string out =
      "As a log parser, your task is to analyze logs and identify dynamic variables. These variables are distinct "
      "from static parts, which are hardcoded sections in the logging code. The categories of dynamic variables are "
      "concluded as:\n\n";
  for (const auto& c : kCategories) {
    out += c.name;
    out += " (";
    out += c.code;
    out += "): ";
    out += c.description;
    out += '\n';
  }
  out +=
      "\nTo parse the logs, substitute dynamic variables with their respective category tokens, denoted by <XXX>. "
      "Everything outside the <XXX> should remain exactly unchanged! Do not fix any typo! If a variable comprises "
      "several smaller, fine-grained variables, don't dissect it. Instead, replace the entire compound variable with "
      "a single <XXX> token. Do not substitute all content in the log as a variable; only genuine dynamic variables "
      "should be replaced.";
  return out;
}

inline std::string build_extraction_prompt(std::string_view log, std::span<const ExtractionExample> shots) {
  std::string out = task_instruction();
  out += "\n\nExamples:\n";
  for (const auto& shot : shots) {
    out += "Log: ";
    out += shot.log;
    out += "\nParsed Log: ";
    out += shot.template_text;
    out += '\n';
  }
  out += "Log: ";
  out += log;
  out += "\nParsed Log: ";
  return out;
}

inline std::string build_merge_verify_prompt(std::span<const std::string> logs) {
  std::string out = task_instruction();
  out +=
      "\n\nGiven the following logs, output the parse result for each of them first, then determine whether they "
      "are instances from the same event template. The output should use the following format:\n\n"
      "EventTemplate_1: {parse result for Log_1}\n"
      "EventTemplate_2: {parse result for Log_2}\n"
      "...\n"
      "EventTemplate_N: {parse result for Log_N}\n\n"
      "Reason: {brief reason whether they should be unified}\n\n"
      "Answer: {\"Yes\" or \"No\"}\n\n"
      "Unified Template: {one unified template if yes. Make sure there are static parts in the template. \"None\" "
      "if the anwser is no}\n\n";
  for (std::size_t i = 0; i < logs.size(); ++i) {
    out += "Log_" + std::to_string(i + 1) + ": " + logs[i] + '\n';
  }
  return out;
}

inline std::string build_merge_check_prompt(std::string_view merged_template, std::span<const std::string> logs) {
  std::string out = task_instruction();
  out += "\n\nDoes the template: \"";
  out += merged_template;
  out += "\" apply to the following logs? Please answer with yes or no.\n\n";
  for (std::size_t i = 0; i < logs.size(); ++i) {
    out += "Log_" + std::to_string(i + 1) + ": " + logs[i] + '\n';
  }
  out += "\nAnswer:";
  return out;
}

// Fine-tuning layout. Without a template the text stops after the response
// header, which is the inference-time prompt.
inline std::string build_finetune_record(std::string_view log, std::optional<std::string_view> tmpl) {
  std::string out =
      "Below is an instruction that describes a task. Write a response that appropriately completes the request\n\n"
      "### Instruction:\n"
      "Analyze the input log and identify dynamic variables. Substitute dynamic variables with <XXX>.\n"
      "### Input:\n";
  out += log;
  out += "\n### Response:\n";
  if (!tmpl) return out;
  out += *tmpl;
  out += "\n### End";
  return out;
}

}  // namespace logmill::prompts
