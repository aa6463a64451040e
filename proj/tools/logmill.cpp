// logmill command-line tool: parse, evaluate, bench, calibrate, export-finetune.

#include <unistd.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "logmill/logmill.hpp"

namespace fs = std::filesystem;
using namespace logmill;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted = true; }

struct BackendOptions {
  std::string kind = "oracle";
  std::string labels;
  std::string replay;
  std::string record;
  std::string base_url;
  std::string model;
  std::string embedding_model;
  std::string embedder = "hashing";
  std::string api_key_env = "LOGMILL_API_KEY";
  int max_tokens = 0;
  int attempts = 5;
};

struct EngineOptions {
  std::size_t shots = Extractor::kDefaultShots;
  std::size_t depth_cap = PrefixTree::kDefaultDepthCap;
  std::string merge = "auto";
  std::string seeds;
  std::size_t pool_cap = ExamplePool::kDefaultCap;
  bool no_member_ids = false;
};

// Usage problems found after CLI11 parsing; exit code 2.
struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(what, true) {}
};

RemoteConfig remote_config(const BackendOptions& b) {
  RemoteConfig cfg;
  cfg.base_url = b.base_url;
  cfg.model = b.model;
  cfg.embedding_model = b.embedding_model;
  cfg.api_key_env = b.api_key_env;
  if (b.max_tokens > 0) cfg.max_tokens = b.max_tokens;
  cfg.attempts = b.attempts;
  return cfg;
}

std::shared_ptr<Embedder> make_embedder(const BackendOptions& b) {
  if (b.embedder == "hashing") return std::make_shared<HashingEmbedder>();
  if (b.embedder == "remote") return std::make_shared<RemoteEmbedder>(remote_config(b));
  throw UsageError("unknown embedder '" + b.embedder + "' (expected hashing or remote)");
}

std::shared_ptr<OracleBackend> oracle_from_csv(const std::string& path) {
  auto oracle = std::make_shared<OracleBackend>();
  if (path.empty()) return oracle;
  for (const auto& row : read_structured_csv(path)) oracle->add(row.content, row.event_template);
  if (oracle->conflicts()) {
    std::cerr << "warning: " << oracle->conflicts() << " contents carry conflicting labels in " << path << "\n";
  }
  return oracle;
}

// `dataset_oracle` replaces --labels when benchmarking.
std::shared_ptr<ExtractionBackend> make_backend(const BackendOptions& b,
                                                std::shared_ptr<OracleBackend> dataset_oracle = nullptr) {
  std::shared_ptr<ExtractionBackend> backend;
  if (b.kind == "oracle") {
    backend = dataset_oracle && b.labels.empty() ? dataset_oracle : oracle_from_csv(b.labels);
  } else if (b.kind == "replay") {
    if (b.replay.empty()) throw UsageError("the replay backend needs --replay <jsonl>");
    backend = std::make_shared<ReplayBackend>(ReplayBackend::from_file(b.replay));
  } else if (b.kind == "remote") {
    backend = std::make_shared<RemoteChatBackend>(remote_config(b));
  } else {
    throw UsageError("unknown backend '" + b.kind + "' (expected oracle, replay or remote)");
  }
  if (!b.record.empty()) backend = std::make_shared<RecordingBackend>(backend, b.record);
  return backend;
}

EngineConfig engine_config(const EngineOptions& e) {
  EngineConfig cfg;
  cfg.shots = e.shots;
  cfg.depth_cap = e.depth_cap;
  const auto policy = parse_merge_policy(e.merge);
  if (!policy) throw UsageError("unknown merge policy '" + e.merge + "' (expected auto, interactive or off)");
  cfg.merge = *policy;
  cfg.example_pool_cap = e.pool_cap;
  cfg.retain_member_ids = !e.no_member_ids;
  return cfg;
}

// Seeds file: JSON Lines of {"log": ..., "template": ...}.
ExamplePool make_pool(const EngineOptions& e, Embedder& embedder) {
  if (e.seeds.empty()) return ExamplePool::with_default_seeds(embedder, e.pool_cap);
  ExamplePool pool(e.pool_cap);
  std::ifstream in(e.seeds);
  if (!in) throw UsageError("cannot read seeds file " + e.seeds);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto log = j.at("log").get<std::string>();
      pool.add({log, j.at("template").get<std::string>(), embedder.embed(log), ExampleOrigin::Seed});
    } catch (const nlohmann::json::exception& ex) {
      throw DatasetCorrupt(e.seeds + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return pool;
}

void print_stats(const EngineStats& s, std::ostream& out) {
  out << "processed " << s.logs_processed << " logs: " << s.extraction_calls << " extraction calls, "
      << s.merge_verify_calls << " merge verifications, " << s.merge_check_calls << " merge checks, " << s.clusters
      << " clusters, " << s.quarantined << " quarantined\n";
}

bool stdin_is_terminal() { return ::isatty(STDIN_FILENO) == 1; }

std::string ask(const std::string& question) {
  std::cerr << question << std::flush;
  std::string answer;
  if (!std::getline(std::cin, answer)) return {};
  return std::string(trim(answer));
}

// Interactive merge decision; an empty reply keeps the proposal.
std::optional<LogTemplate> ask_merge(const std::string& left, const std::string& right,
                                     const std::vector<std::string>& samples,
                                     const std::optional<LogTemplate>& proposal) {
  std::cerr << "\n  A: " << left << "\n  B: " << right << "\n";
  for (const auto& s : samples) std::cerr << "     | " << s << "\n";
  std::cerr << "  proposed: " << (proposal ? proposal->text : std::string("(none)")) << "\n";
  const std::string a = ask("merge? [y/N/e=edit] ");
  if (a == "y" || a == "Y" || a == "yes") return proposal;
  if (a == "e" || a == "E") {
    const std::string t = ask("unified template: ");
    if (t.empty()) return std::nullopt;
    return normalize_template(t);
  }
  return std::nullopt;
}

enum class Decide { Interactive, ApproveAll, RejectAll };

Decide parse_decide(const std::string& s) {
  if (s == "interactive") return Decide::Interactive;
  if (s == "approve-all") return Decide::ApproveAll;
  if (s == "reject-all") return Decide::RejectAll;
  throw UsageError("unknown --decide '" + s + "' (expected interactive, approve-all or reject-all)");
}

struct ParseArgs {
  std::string input = "-";
  std::string format = "<Content>";
  std::string output = "-";
  std::string state;
  std::string state_out;
  LineId first_line_id = 1;
};

// Streams `args.input` through `engine`, writing structured rows as it goes.
void stream_parse(Engine& engine, const ParseArgs& args) {
  const LogFormat format(args.format);
  std::ifstream file;
  std::istream* in = &std::cin;
  if (args.input != "-") {
    file.open(args.input, std::ios::binary);
    if (!file) throw Error("cannot read " + args.input);
    in = &file;
  }
  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (args.output != "-") {
    out_file.open(args.output, std::ios::binary | std::ios::trunc);
    if (!out_file) throw Error("cannot write " + args.output);
    out = &out_file;
  }
  write_csv_row(*out, kStructuredHeader);
  std::string line;
  LineId id = args.first_line_id;
  while (std::getline(*in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    RawLogRecord rec{id++, line, ""};
    rec.content = format.content(line).value_or(line);
    const StructuredRow row = parse_record(engine, rec);
    write_csv_row(*out, {std::to_string(row.line_id), row.content, row.event_id, row.event_template});
  }
  out->flush();
}

Engine open_engine(const std::string& state, const BackendOptions& b, const EngineOptions& e) {
  auto embedder = make_embedder(b);
  auto backend = make_backend(b);
  if (!state.empty() && fs::exists(state)) return load_state(state, backend, embedder);
  ExamplePool pool = make_pool(e, *embedder);
  return Engine(engine_config(e), backend, embedder, std::move(pool));
}

void finish_parse(Engine& engine, const ParseArgs& args) {
  const std::string target = args.state_out.empty() ? args.state : args.state_out;
  if (!target.empty()) save_state(engine, target);
  const EngineStats s = engine.stats();
  print_stats(s, std::cerr);
  if (s.quarantined) {
    std::cerr << "warning: " << s.quarantined << " logs quarantined (extractor unavailable or missing response)\n";
  }
}

int cmd_parse(const ParseArgs& args, const BackendOptions& b, const EngineOptions& e) {
  Engine engine = open_engine(args.state, b, e);
  if (engine.config().merge == MergePolicy::Interactive) {
    throw UsageError("--merge interactive needs a reviewer; use `calibrate --mode realtime`");
  }
  if (b.kind == "oracle" && b.labels.empty()) {
    std::cerr << "warning: oracle backend without --labels; unmatched logs will be quarantined\n";
  }
  stream_parse(engine, args);
  finish_parse(engine, args);
  return 0;
}

struct EvaluateArgs {
  std::string pred;
  std::string gt;
  std::string json_out;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const MetricReport r = evaluate(read_parsing_result(args.pred), read_parsing_result(args.gt));
  std::cout << format_table({{fs::path(args.pred).stem().string(), r}});
  if (!args.json_out.empty()) {
    std::ofstream out(args.json_out, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + args.json_out);
    out << to_json(r).dump(2) << "\n";
  }
  return 0;
}

// Dataset config: one INI section per dataset with keys log, structured,
// templates and format. Relative paths resolve against the config's folder.
std::vector<DatasetSpec> read_dataset_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read dataset config " + path);
  const fs::path base = fs::path(path).parent_path();
  std::map<std::string, DatasetSpec> specs;
  std::vector<std::string> order;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.parents.empty() || item.name == "++" || item.name == "--") continue;
    const std::string& section = item.parents.front();
    auto [it, inserted] = specs.try_emplace(section);
    if (inserted) {
      it->second.name = section;
      order.push_back(section);
    }
    const std::string value = item.inputs.empty() ? std::string() : item.inputs.front();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    if (item.name == "log") {
      it->second.log_path = resolve(value);
    } else if (item.name == "structured") {
      it->second.structured_path = resolve(value);
    } else if (item.name == "templates") {
      it->second.templates_path = resolve(value);
    } else if (item.name == "format") {
      it->second.log_format = value;
    } else {
      throw UsageError(path + ": unknown key '" + item.name + "' in [" + section + "]");
    }
  }
  std::vector<DatasetSpec> out;
  for (const auto& name : order) {
    const auto& s = specs.at(name);
    if (s.log_path.empty() || s.structured_path.empty() || s.log_format.empty()) {
      throw UsageError(path + ": [" + name + "] needs log, structured and format");
    }
    out.push_back(s);
  }
  return out;
}

std::vector<DatasetSpec> select_datasets(const std::string& config, const std::vector<std::string>& names, bool all) {
  if (config.empty()) throw UsageError("--datasets <config> is required");
  auto specs = read_dataset_config(config);
  if (all || names.empty()) return specs;
  std::vector<DatasetSpec> out;
  for (const auto& n : names) {
    const auto it = std::find_if(specs.begin(), specs.end(), [&](const DatasetSpec& s) { return s.name == n; });
    if (it == specs.end()) throw UsageError("dataset '" + n + "' is not in " + config);
    out.push_back(*it);
  }
  return out;
}

struct BenchArgs {
  std::string datasets;
  std::vector<std::string> names;
  bool all = false;
  std::string output_dir;
  std::string report;
  bool no_timing = false;
  std::size_t calibration_shots = 0;
  double assumed_latency = -1;
  std::size_t jobs = 1;
};

BenchRun bench_one(const DatasetSpec& spec, const BenchArgs& args, const BackendOptions& b, const EngineOptions& e) {
  const Dataset ds = load_dataset(spec);
  auto embedder = make_embedder(b);
  auto backend = make_backend(b, b.kind == "oracle" ? oracle_from(ds) : nullptr);
  ExamplePool pool = make_pool(e, *embedder);
  if (args.calibration_shots > 0) {
    const auto sample = sample_calibration_shots(ds.records, args.calibration_shots);
    if (sample.short_dataset) {
      std::cerr << "warning: " << spec.name << " has only " << sample.pairs.size() << " calibration pairs\n";
    }
    add_calibration_examples(pool, *embedder, sample.pairs);
  }
  Engine engine(engine_config(e), backend, embedder, std::move(pool));
  if (engine.config().merge == MergePolicy::Interactive) {
    throw UsageError("bench does not support --merge interactive");
  }
  BenchOptions opts;
  if (args.assumed_latency >= 0) opts.assumed_latency_seconds = args.assumed_latency;
  opts.interrupt = &g_interrupted;
  BenchRun run = run_benchmark(ds, engine, opts);
  if (!args.output_dir.empty()) {
    fs::create_directories(args.output_dir);
    std::ofstream out(fs::path(args.output_dir) / (spec.name + "_structured.csv"), std::ios::binary | std::ios::trunc);
    write_structured_csv(out, run.parsed);
  }
  return run;
}

int cmd_bench(const BenchArgs& args, const BackendOptions& b, const EngineOptions& e) {
  const auto specs = select_datasets(args.datasets, args.names, args.all);
  std::vector<BenchReport> reports(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  std::signal(SIGINT, on_sigint);
  const std::size_t jobs = std::max<std::size_t>(1, std::min(args.jobs, specs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        reports[i] = bench_one(specs[i], args, b, e).report;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  std::cout << format_bench_table(reports, !args.no_timing);
  if (!args.report.empty()) {
    auto j = nlohmann::ordered_json::array();
    for (const auto& r : reports) j.push_back(to_json(r, !args.no_timing));
    std::ofstream out(args.report, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + args.report);
    out << j.dump(2) << "\n";
  }
  return g_interrupted ? 130 : 0;
}

struct CalibrateArgs {
  std::string mode = "post";
  std::string decide = "interactive";
  double floor = 0.9;
  ParseArgs parse;
};

int cmd_calibrate(CalibrateArgs args, const BackendOptions& b, const EngineOptions& e) {
  const Decide decide = parse_decide(args.decide);
  if (decide == Decide::Interactive && !stdin_is_terminal()) {
    throw UsageError(
        "interactive calibration needs a terminal on stdin; rerun from a terminal or pass "
        "--decide approve-all / --decide reject-all");
  }
  if (args.parse.state.empty()) throw UsageError("calibrate needs --state <file>");

  if (args.mode == "realtime") {
    if (args.parse.input == "-" && decide == Decide::Interactive) {
      throw UsageError("realtime calibration reads answers from stdin; pass the log file as an argument");
    }
    Engine engine = open_engine(args.parse.state, b, e);
    engine.set_merge_policy(MergePolicy::Interactive);
    engine.set_calibration_hook([decide](const MergeQuery& q) {
      MergeDecision d;
      std::optional<LogTemplate> unified;
      if (decide == Decide::ApproveAll) {
        unified = q.proposal;
      } else if (decide == Decide::Interactive) {
        std::vector<std::string> samples = q.cluster.samples;
        samples.push_back(q.record.content);
        unified = ask_merge(q.cluster.log_template.text, q.extracted.text, samples, q.proposal);
      }
      d.answer = unified.has_value();
      d.unified_template = unified;
      return d;
    });
    stream_parse(engine, args.parse);
    engine.set_merge_policy(parse_merge_policy(e.merge).value_or(MergePolicy::Auto));
    finish_parse(engine, args.parse);
    return 0;
  }
  if (args.mode != "post") throw UsageError("unknown --mode '" + args.mode + "' (expected post or realtime)");

  if (!fs::exists(args.parse.state)) throw StateCorrupt("state file " + args.parse.state + " does not exist");
  Engine engine = open_engine(args.parse.state, b, e);
  const auto suggestions = engine.suggest_post_merges(args.floor);
  if (suggestions.empty()) {
    std::cout << "no suggestions at similarity floor " << args.floor << "\n";
  }
  std::size_t applied = 0;
  for (const auto& s : suggestions) {
    const LogCluster* a = engine.cluster(s.first);
    const LogCluster* c = engine.cluster(s.second);
    if (!a || !c) continue;  // absorbed by an earlier merge
    const auto proposal = generalize_templates(a->log_template.text, c->log_template.text);
    std::printf("suggestion E%lld + E%lld (similarity %.4f)\n", static_cast<long long>(s.first),
                static_cast<long long>(s.second), s.score);
    std::optional<LogTemplate> unified;
    if (decide == Decide::ApproveAll) {
      unified = proposal;
    } else if (decide == Decide::Interactive) {
      std::vector<std::string> samples = a->samples;
      samples.insert(samples.end(), c->samples.begin(), c->samples.end());
      unified = ask_merge(a->log_template.text, c->log_template.text, samples, proposal);
    }
    if (!unified) continue;
    try {
      engine.merge_clusters(s.first, s.second, *unified);
      ++applied;
      std::cout << "merged E" << s.second << " into E" << s.first << " as: " << unified->text << "\n";
    } catch (const Error& err) {
      std::cerr << "skipped: " << err.what() << "\n";
    }
  }
  std::cout << applied << " merges applied, " << engine.clusters().size() << " clusters\n";
  save_state(engine, args.parse.state_out.empty() ? args.parse.state : args.parse.state_out);
  return 0;
}

struct ExportArgs {
  std::string labels;
  std::string datasets;
  std::string dataset;
  std::size_t sample = 32;
  std::string output = "-";
};

int cmd_export_finetune(const ExportArgs& args) {
  std::vector<LabeledRecord> records;
  if (!args.dataset.empty()) {
    for (const auto& spec : select_datasets(args.datasets, {args.dataset}, false)) {
      records = load_dataset(spec).records;
    }
  } else if (!args.labels.empty()) {
    for (const auto& row : read_structured_csv(args.labels)) {
      records.push_back({{row.line_id, row.content, row.content}, row.event_template, row.event_id, false});
    }
  } else {
    throw UsageError("export-finetune needs --labels <csv> or --dataset <name> --datasets <config>");
  }
  std::vector<LabeledRecord> pairs;
  if (args.sample == 0) {
    pairs = std::move(records);
  } else {
    auto sample = sample_calibration_shots(records, args.sample);
    if (sample.short_dataset && !records.empty()) {
      std::cerr << "warning: only " << sample.pairs.size() << " pairs available in the first 10% of the input\n";
    }
    pairs = std::move(sample.pairs);
  }
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (args.output != "-") {
    file.open(args.output, std::ios::binary | std::ios::trunc);
    if (!file) throw Error("cannot write " + args.output);
    out = &file;
  }
  for (const auto& p : pairs) {
    const nlohmann::ordered_json j{{"text", prompts::build_finetune_record(p.record.content, p.gt_template)}};
    *out << j.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logmill: LLM-assisted online log parsing"};
  app.set_config("--config", "", "INI/TOML file with option defaults; flags win");
  app.require_subcommand(1);
  app.fallthrough();

  BackendOptions b;
  EngineOptions e;
  app.add_option("--backend", b.kind, "Template extractor: oracle, replay or remote")->capture_default_str();
  app.add_option("--labels", b.labels, "Structured CSV answering oracle requests");
  app.add_option("--replay", b.replay, "Recorded responses (JSON Lines) for the replay backend");
  app.add_option("--record", b.record, "Append every request/response pair to this JSON Lines file");
  app.add_option("--base-url", b.base_url, "Chat/embedding endpoint, scheme://host[:port]");
  app.add_option("--model", b.model, "Chat model name");
  app.add_option("--embedding-model", b.embedding_model, "Embedding model name");
  app.add_option("--embedder", b.embedder, "Example embedder: hashing or remote")->capture_default_str();
  app.add_option("--api-key-env", b.api_key_env, "Environment variable holding the API key")->capture_default_str();
  app.add_option("--max-tokens", b.max_tokens, "Completion token limit (0 = endpoint default)");
  app.add_option("--attempts", b.attempts, "Attempts per remote request")->capture_default_str();
  app.add_option("--shots", e.shots, "In-context examples per extraction")->capture_default_str();
  app.add_option("--depth-cap", e.depth_cap, "Prefix tree depth cap")->capture_default_str();
  app.add_option("--merge", e.merge, "Merge policy: auto, interactive or off")->capture_default_str();
  app.add_option("--seeds", e.seeds, "JSON Lines of {log, template} replacing the built-in seeds");
  app.add_option("--pool-cap", e.pool_cap, "Example pool capacity")->capture_default_str();
  app.add_flag("--no-member-ids", e.no_member_ids, "Keep member counts only");

  ParseArgs parse_args;
  auto* parse = app.add_subcommand("parse", "Parse a log stream into structured CSV");
  parse->add_option("input", parse_args.input, "Log file ('-' for stdin)")->capture_default_str();
  parse->add_option("--format", parse_args.format, "Header pattern such as '<Date> <Time> <Level> <Content>'")
      ->capture_default_str();
  parse->add_option("-o,--output", parse_args.output, "Structured CSV output ('-' for stdout)")->capture_default_str();
  parse->add_option("--state", parse_args.state, "State file loaded if present and saved on completion");
  parse->add_option("--state-out", parse_args.state_out, "Save state here instead of --state");
  parse->add_option("--first-line-id", parse_args.first_line_id, "LineId of the first input line")
      ->capture_default_str();

  EvaluateArgs eval_args;
  auto* eval = app.add_subcommand("evaluate", "Score a structured CSV against ground truth");
  eval->add_option("pred", eval_args.pred, "Predicted structured CSV")->required();
  eval->add_option("gt", eval_args.gt, "Ground-truth structured CSV")->required();
  eval->add_option("--json", eval_args.json_out, "Also write the report as JSON");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Parse and score loghub-style datasets");
  bench->add_option("--datasets", bench_args.datasets, "Dataset config (INI)")->required();
  bench->add_option("--dataset", bench_args.names, "Dataset section to run (repeatable)");
  bench->add_flag("--all", bench_args.all, "Run every dataset in the config");
  bench->add_option("--output-dir", bench_args.output_dir, "Write <name>_structured.csv files here");
  bench->add_option("--report", bench_args.report, "Write the report as JSON");
  bench->add_flag("--no-timing", bench_args.no_timing, "Omit wall-clock figures");
  bench->add_option("--calibration-shots", bench_args.calibration_shots,
                    "Labeled pairs from the first 10% added to the example pool");
  bench->add_option("--assumed-latency", bench_args.assumed_latency,
                    "Seconds per call for the estimated extractor time");
  bench->add_option("-j,--jobs", bench_args.jobs, "Datasets benchmarked concurrently")->capture_default_str();

  CalibrateArgs cal_args;
  auto* cal = app.add_subcommand("calibrate", "Review merges of a saved state");
  cal->add_option("--state", cal_args.parse.state, "State file")->required();
  cal->add_option("--state-out", cal_args.parse.state_out, "Save state here instead of --state");
  cal->add_option("--mode", cal_args.mode, "post or realtime")->capture_default_str();
  cal->add_option("--decide", cal_args.decide, "interactive, approve-all or reject-all")->capture_default_str();
  cal->add_option("--floor", cal_args.floor, "Similarity floor for post-processing suggestions")
      ->capture_default_str();
  cal->add_option("input", cal_args.parse.input, "Log file parsed in realtime mode");
  cal->add_option("--format", cal_args.parse.format, "Header pattern (realtime mode)")->capture_default_str();
  cal->add_option("-o,--output", cal_args.parse.output, "Structured CSV output (realtime mode)")
      ->capture_default_str();

  ExportArgs export_args;
  auto* exp = app.add_subcommand("export-finetune", "Write fine-tuning records as JSON Lines");
  exp->add_option("--labels", export_args.labels, "Structured CSV of labeled logs");
  exp->add_option("--datasets", export_args.datasets, "Dataset config (INI)");
  exp->add_option("--dataset", export_args.dataset, "Dataset section to sample");
  exp->add_option("--sample", export_args.sample, "Pairs drawn from the first 10% (0 = every row)")
      ->capture_default_str();
  exp->add_option("-o,--output", export_args.output, "Output file ('-' for stdout)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (*parse) return cmd_parse(parse_args, b, e);
    if (*eval) return cmd_evaluate(eval_args);
    if (*bench) return cmd_bench(bench_args, b, e);
    if (*cal) return cmd_calibrate(cal_args, b, e);
    if (*exp) return cmd_export_finetune(export_args);
  } catch (const Error& err) {
    std::cerr << "logmill: " << err.what() << "\n";
    return err.contract_violation() ? 2 : 1;
  } catch (const std::exception& err) {
    std::cerr << "logmill: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
