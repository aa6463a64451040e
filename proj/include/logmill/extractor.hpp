#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "logmill/backend.hpp"
#include "logmill/embedding.hpp"
#include "logmill/example_pool.hpp"
#include "logmill/model.hpp"
#include "logmill/prompts.hpp"
#include "logmill/responses.hpp"

namespace logmill {

struct Extraction {
  LogTemplate tmpl;
  std::string raw;  // parsed response before normalization
  Embedding embedding;
  bool fallback = false;  // extractor returned nothing twice; whole log kept static
  std::size_t calls = 0;
};

struct ExtractorCounters {
  std::atomic<std::size_t> extraction_calls{0};
  std::atomic<std::size_t> merge_verify_calls{0};
  std::atomic<std::size_t> merge_check_calls{0};
  std::atomic<std::int64_t> backend_nanos{0};
};

class Extractor {
 public:
  static constexpr std::size_t kDefaultShots = 3;

  Extractor(std::shared_ptr<ExtractionBackend> backend, std::shared_ptr<Embedder> embedder, ExamplePool pool,
            std::size_t shots = kDefaultShots)
      : backend_(std::move(backend)), embedder_(std::move(embedder)), pool_(std::move(pool)), shots_(shots) {}

  Extraction extract_template(const std::string& log) {
    Extraction out;
    out.embedding = embedder_->embed(log);
    std::vector<ExtractionExample> shots;
    if (pool_.size() > 0 && shots_ > 0) shots = select_examples(out.embedding, pool_, shots_);
    const std::string prompt = prompts::build_extraction_prompt(log, shots);
    for (int attempt = 0; attempt < 2 && out.raw.empty(); ++attempt) {
      ++out.calls;
      ++counters_.extraction_calls;
      const std::string response = timed([&] { return backend_->extraction_response(log, prompt); });
      try {
        out.raw = parse_extraction_response(response);
      } catch (const EmptyExtraction&) {
      }
    }
    if (out.raw.empty()) {
      out.fallback = true;
      out.tmpl = LogTemplate{join_tokens(tokenize(log)), 0, false};
      return out;
    }
    out.tmpl = normalize_template(out.raw);
    pool_.add({log, out.raw, out.embedding, ExampleOrigin::Learned});
    return out;
  }

  // Throws MergeParseError when the reply carries no usable yes/no answer.
  MergeDecision verify_merge(std::span<const std::string> logs) {
    if (logs.size() < 2) throw std::invalid_argument("merge verification needs at least two logs");
    ++counters_.merge_verify_calls;
    const std::string prompt = prompts::build_merge_verify_prompt(logs);
    const std::string response = timed([&] { return backend_->merge_verify_response(logs, prompt); });
    return parse_merge_response(response);
  }

  bool check_template_applies(const LogTemplate& merged, std::span<const std::string> logs) {
    if (merged.text.empty() || !has_static_token(merged.text)) return false;
    ++counters_.merge_check_calls;
    const std::string prompt = prompts::build_merge_check_prompt(merged.text, logs);
    const std::string response = timed([&] { return backend_->merge_check_response(merged.text, logs, prompt); });
    return parse_check_response(response);
  }

  Embedding embed(std::string_view text) { return embedder_->embed(text); }

  ExamplePool& pool() noexcept { return pool_; }
  const ExamplePool& pool() const noexcept { return pool_; }
  const ExtractorCounters& counters() const noexcept { return counters_; }
  std::size_t shots() const noexcept { return shots_; }
  Embedder& embedder() noexcept { return *embedder_; }

  void restore_counters(std::size_t extraction, std::size_t verify, std::size_t check) {
    counters_.extraction_calls = extraction;
    counters_.merge_verify_calls = verify;
    counters_.merge_check_calls = check;
  }

 private:
  template <class F>
  std::string timed(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Stop {
      ExtractorCounters& c;
      std::chrono::steady_clock::time_point t;
      ~Stop() {
        c.backend_nanos += std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t)
                               .count();
      }
    } stop{counters_, start};
    return f();
  }

  std::shared_ptr<ExtractionBackend> backend_;
  std::shared_ptr<Embedder> embedder_;
  ExamplePool pool_;
  std::size_t shots_;
  ExtractorCounters counters_;
};

}  // namespace logmill
