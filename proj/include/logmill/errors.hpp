#pragma once

#include <stdexcept>
#include <string>

namespace logmill {

// Base of every error the library throws. `contract_violation()` marks errors
// caused by bad input (exit code 2 in the CLI) as opposed to operational
// failures (exit code 1).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, bool contract = false)
      : std::runtime_error(what), contract_(contract) {}
  bool contract_violation() const noexcept { return contract_; }

 private:
  bool contract_;
};

#define LOGMILL_DEFINE_ERROR(Name, contract)                   \
  class Name : public Error {                                  \
   public:                                                     \
    explicit Name(const std::string& what) : Error(what, contract) {} \
  };

LOGMILL_DEFINE_ERROR(EmptyContent, true)
LOGMILL_DEFINE_ERROR(EmbeddingDimError, true)
LOGMILL_DEFINE_ERROR(EmptyExtraction, false)
LOGMILL_DEFINE_ERROR(ExtractionUnavailable, false)
LOGMILL_DEFINE_ERROR(OracleMiss, false)
LOGMILL_DEFINE_ERROR(ReplayMiss, false)
LOGMILL_DEFINE_ERROR(MergeParseError, false)
LOGMILL_DEFINE_ERROR(StateVersionError, true)
LOGMILL_DEFINE_ERROR(StateCorrupt, true)
LOGMILL_DEFINE_ERROR(ResultMismatch, true)
LOGMILL_DEFINE_ERROR(DatasetCorrupt, true)

#undef LOGMILL_DEFINE_ERROR

// Raised when a template's static text cannot be laid over a log's tokens.
class AlignmentError : public Error {
 public:
  AlignmentError(std::string content, std::string tmpl)
      : Error("template '" + tmpl + "' does not align with '" + content + "'"),
        content_(std::move(content)),
        template_(std::move(tmpl)) {}
  const std::string& content() const noexcept { return content_; }
  const std::string& template_text() const noexcept { return template_; }

 private:
  std::string content_;
  std::string template_;
};

}  // namespace logmill
