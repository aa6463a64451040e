#pragma once

// Benchmark execution over a loaded dataset: streams records through an
// engine, scores the result and accounts for extractor calls and time.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <memory>
#include <optional>
#include <chrono>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "logmill/backend.hpp"
#include "logmill/csv.hpp"
#include "logmill/dataset.hpp"
#include "logmill/engine.hpp"
#include "logmill/metrics.hpp"

namespace logmill {

struct BenchOptions {
  // Per-call latency used for the estimated extractor time; the measured
  // average is used when unset.
  std::optional<double> assumed_latency_seconds;
  const std::atomic<bool>* interrupt = nullptr;
};

struct BenchReport {
  std::string dataset;
  MetricReport metrics;
  std::size_t lines = 0;
  std::size_t processed = 0;
  std::size_t llm_calls = 0;  // template extractions
  std::size_t merge_verify_calls = 0;
  std::size_t merge_check_calls = 0;
  std::size_t clusters = 0;
  std::size_t quarantined = 0;
  std::size_t label_conflicts = 0;
  std::size_t header_mismatches = 0;
  bool partial = false;
  double total_seconds = 0;
  double extraction_seconds_measured = 0;
  double extraction_seconds_estimated = 0;
  double base_seconds = 0;
};

struct BenchRun {
  BenchReport report;
  std::vector<StructuredRow> parsed;
};

inline std::string event_id(ClusterId id) { return "E" + std::to_string(id); }

// Structured output row for one processed record.
inline StructuredRow output_row(const Engine& engine, const RawLogRecord& record,
                                const std::optional<ClusterId>& cluster) {
  StructuredRow row{record.line_id, record.content, "", ""};
  if (cluster) {
    row.event_id = event_id(*cluster);
    if (const LogCluster* c = engine.cluster(*cluster)) row.event_template = c->log_template.text;
  }
  return row;
}

// Feeds one record; blank content bypasses the engine and yields an empty row.
inline StructuredRow parse_record(Engine& engine, const RawLogRecord& record) {
  if (trim(record.content).empty()) return StructuredRow{record.line_id, record.content, "", ""};
  const ParseOutcome outcome = engine.process_log(record);
  return output_row(engine, record, outcome.cluster_id);
}

inline std::shared_ptr<OracleBackend> oracle_from(const Dataset& ds) {
  auto oracle = std::make_shared<OracleBackend>();
  for (const auto& l : ds.records) oracle->add(l.record.content, l.gt_template);
  return oracle;
}

inline void add_calibration_examples(ExamplePool& pool, Embedder& embedder, const std::vector<LabeledRecord>& pairs) {
  for (const auto& p : pairs) {
    pool.add({p.record.content, p.gt_template, embedder.embed(p.record.content), ExampleOrigin::Calibration});
  }
}

inline BenchRun run_benchmark(const Dataset& ds, Engine& engine, const BenchOptions& options = {}) {
  BenchRun run;
  BenchReport& r = run.report;
  r.dataset = ds.name;
  r.lines = ds.records.size();
  r.header_mismatches = ds.header_mismatches;
  r.label_conflicts = label_conflicts(ds).size();
  const EngineStats before = engine.stats();
  const auto start = std::chrono::steady_clock::now();

  run.parsed.reserve(ds.records.size());
  for (const auto& l : ds.records) {
    if (options.interrupt && options.interrupt->load()) {
      r.partial = true;
      break;
    }
    run.parsed.push_back(parse_record(engine, l.record));
  }
  r.processed = run.parsed.size();

  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const EngineStats after = engine.stats();
  r.llm_calls = after.extraction_calls - before.extraction_calls;
  r.merge_verify_calls = after.merge_verify_calls - before.merge_verify_calls;
  r.merge_check_calls = after.merge_check_calls - before.merge_check_calls;
  r.clusters = after.clusters;
  r.quarantined = after.quarantined;

  ParsingResult pred = to_parsing_result(run.parsed);
  ParsingResult gt;
  for (std::size_t i = 0; i < r.processed; ++i) {
    const auto& l = ds.records[i];
    gt.add(l.record.line_id, l.gt_group, l.gt_template);
  }
  r.metrics = evaluate(pred, gt);

  const std::size_t calls = r.llm_calls + r.merge_verify_calls + r.merge_check_calls;
  r.total_seconds = elapsed;
  r.extraction_seconds_measured = after.extractor_seconds - before.extractor_seconds;
  const double latency = options.assumed_latency_seconds
                             ? *options.assumed_latency_seconds
                             : (calls ? r.extraction_seconds_measured / static_cast<double>(calls) : 0.0);
  r.extraction_seconds_estimated = latency * static_cast<double>(calls);
  r.base_seconds = std::max(0.0, r.total_seconds - r.extraction_seconds_measured);
  return run;
}

inline nlohmann::ordered_json to_json(const BenchReport& r, bool include_timing = true) {
  nlohmann::ordered_json j{{"dataset", r.dataset},
                           {"lines", r.lines},
                           {"processed", r.processed},
                           {"partial", r.partial},
                           {"metrics", to_json(r.metrics)},
                           {"llm_calls", r.llm_calls},
                           {"merge_verify_calls", r.merge_verify_calls},
                           {"merge_check_calls", r.merge_check_calls},
                           {"clusters", r.clusters},
                           {"quarantined", r.quarantined},
                           {"label_conflicts", r.label_conflicts},
                           {"header_mismatches", r.header_mismatches}};
  if (include_timing) {
    j["timing"] = {{"total_seconds", r.total_seconds},
                   {"base_seconds", r.base_seconds},
                   {"extraction_seconds_measured", r.extraction_seconds_measured},
                   {"extraction_seconds_estimated", r.extraction_seconds_estimated}};
  }
  return j;
}

inline std::string format_bench_table(const std::vector<BenchReport>& reports, bool include_timing = true) {
  std::vector<std::pair<std::string, MetricReport>> rows;
  for (const auto& r : reports) rows.emplace_back(r.dataset, r.metrics);
  std::string out = format_table(rows);
  out += "\n";
  char buf[256];
  for (const auto& r : reports) {
    if (include_timing) {
      std::snprintf(buf, sizeof buf, "%s: %zu lines, %zu llm calls, %zu clusters, base %.3fs, extractor %.3fs%s\n",
                    r.dataset.c_str(), r.processed, r.llm_calls, r.clusters, r.base_seconds,
                    r.extraction_seconds_measured, r.partial ? " (partial)" : "");
    } else {
      std::snprintf(buf, sizeof buf, "%s: %zu lines, %zu llm calls, %zu clusters%s\n", r.dataset.c_str(), r.processed,
                    r.llm_calls, r.clusters, r.partial ? " (partial)" : "");
    }
    out += buf;
  }
  return out;
}

}  // namespace logmill
