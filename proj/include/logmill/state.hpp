#pragma once

// Versioned JSON persistence of an engine. The tree is not stored; it is
// rebuilt from the clusters' syntax variants on load. Timing statistics are
// session-local and not persisted.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "logmill/engine.hpp"

namespace logmill {

inline constexpr int kStateVersion = 1;

namespace detail {

inline std::string_view origin_name(ExampleOrigin o) {
  switch (o) {
    case ExampleOrigin::Seed: return "seed";
    case ExampleOrigin::Calibration: return "calibration";
    case ExampleOrigin::Learned: return "learned";
  }
  return "learned";
}

inline ExampleOrigin parse_origin(const std::string& s) {
  if (s == "seed") return ExampleOrigin::Seed;
  if (s == "calibration") return ExampleOrigin::Calibration;
  if (s == "learned") return ExampleOrigin::Learned;
  throw StateCorrupt("unknown example origin '" + s + "'");
}

}  // namespace detail

inline nlohmann::json state_to_json(const Engine& engine) {
  using nlohmann::json;
  const EngineConfig& cfg = engine.config();
  json clusters = json::array();
  for (const auto& [id, c] : engine.clusters()) {
    json variants = json::array();
    for (const auto& [count, list] : c.syntax_variants) {
      for (const auto& st : list) variants.push_back(st.entries);
    }
    clusters.push_back({{"id", id},
                        {"template", c.log_template.text},
                        {"variants", std::move(variants)},
                        {"members", c.member_ids},
                        {"member_count", c.member_count},
                        {"embedding", c.embedding},
                        {"samples", c.samples},
                        {"flags", c.flags}});
  }
  json pool = json::object();
  for (const auto& [text, id] : engine.template_pool()) pool[text] = id;

  json examples = json::array();
  const auto& epool = engine.extractor().pool();
  for (const auto& e : epool.examples()) {
    examples.push_back({{"log", e.log}, {"template", e.template_text}, {"origin", detail::origin_name(e.origin)}});
  }

  json quarantine = json::array();
  for (const auto& [count, list] : engine.quarantine()) {
    for (const auto& r : list) quarantine.push_back({{"line_id", r.line_id}, {"raw", r.raw}, {"content", r.content}});
  }

  const EngineStats s = engine.stats();
  return json{
      {"version", kStateVersion},
      {"config",
       {{"shots", cfg.shots},
        {"depth_cap", cfg.depth_cap},
        {"merge_policy", to_string(cfg.merge)},
        {"retain_member_ids", cfg.retain_member_ids},
        {"example_pool_cap", cfg.example_pool_cap},
        {"merge_sample_logs", cfg.merge_sample_logs}}},
      {"next_cluster_id", engine.next_cluster_id()},
      {"clusters", std::move(clusters)},
      {"template_pool", std::move(pool)},
      {"example_pool_meta",
       {{"cap", epool.cap()}, {"seed_count", epool.seed_count()}, {"size", epool.size()}, {"examples", examples}}},
      {"quarantine", std::move(quarantine)},
      {"stats",
       {{"logs_processed", s.logs_processed},
        {"extraction_calls", s.extraction_calls},
        {"merge_verify_calls", s.merge_verify_calls},
        {"merge_check_calls", s.merge_check_calls},
        {"clusters", s.clusters},
        {"quarantined", s.quarantined}}},
  };
}

inline Engine state_from_json(const nlohmann::json& j, std::shared_ptr<ExtractionBackend> backend,
                              std::shared_ptr<Embedder> embedder) {
  if (!j.is_object() || !j.contains("version")) throw StateCorrupt("state document has no version");
  if (!j.at("version").is_number_integer() || j.at("version").get<int>() != kStateVersion) {
    throw StateVersionError("unsupported state version " + j.at("version").dump() + " (expected " +
                            std::to_string(kStateVersion) + ")");
  }
  try {
    const auto& jc = j.at("config");
    EngineConfig cfg;
    cfg.shots = jc.at("shots").get<std::size_t>();
    cfg.depth_cap = jc.at("depth_cap").get<std::size_t>();
    const auto policy = parse_merge_policy(jc.at("merge_policy").get<std::string>());
    if (!policy) throw StateCorrupt("unknown merge policy");
    cfg.merge = *policy;
    cfg.retain_member_ids = jc.at("retain_member_ids").get<bool>();
    cfg.example_pool_cap = jc.at("example_pool_cap").get<std::size_t>();
    cfg.merge_sample_logs = jc.at("merge_sample_logs").get<std::size_t>();

    ExamplePool pool(cfg.example_pool_cap);
    for (const auto& e : j.at("example_pool_meta").at("examples")) {
      const auto log = e.at("log").get<std::string>();
      pool.add({log, e.at("template").get<std::string>(), embedder->embed(log),
                detail::parse_origin(e.at("origin").get<std::string>())});
    }

    Engine::Restored r;
    for (const auto& jcl : j.at("clusters")) {
      LogCluster c;
      c.id = jcl.at("id").get<ClusterId>();
      c.log_template = normalize_template(jcl.at("template").get<std::string>());
      for (const auto& v : jcl.at("variants")) {
        SyntaxTemplate st{v.get<std::vector<std::string>>()};
        if (st.entries.empty()) throw StateCorrupt("empty syntax variant in cluster " + std::to_string(c.id));
        c.add_variant(std::move(st));
      }
      c.member_ids = jcl.at("members").get<std::vector<LineId>>();
      c.member_count = jcl.at("member_count").get<std::size_t>();
      c.embedding = jcl.at("embedding").get<Embedding>();
      c.samples = jcl.at("samples").get<std::vector<std::string>>();
      c.flags = jcl.at("flags").get<std::set<std::string>>();
      if (!r.clusters.emplace(c.id, std::move(c)).second) throw StateCorrupt("duplicate cluster id");
    }
    for (const auto& [text, id] : j.at("template_pool").items()) {
      const auto cid = id.get<ClusterId>();
      if (!r.clusters.count(cid)) throw StateCorrupt("template pool points at missing cluster " + std::to_string(cid));
      r.pool.emplace(text, cid);
    }
    for (const auto& [id, c] : r.clusters) {
      const auto it = r.pool.find(c.log_template.text);
      if (it == r.pool.end() || it->second != id) {
        throw StateCorrupt("cluster " + std::to_string(id) + " template is not a pool key");
      }
    }
    for (const auto& q : j.at("quarantine")) {
      RawLogRecord rec{q.at("line_id").get<LineId>(), q.at("raw").get<std::string>(),
                       q.at("content").get<std::string>()};
      r.quarantine[split_whitespace(rec.content).size()].push_back(std::move(rec));
    }
    r.next_id = j.at("next_cluster_id").get<ClusterId>();
    const auto& js = j.at("stats");
    r.logs_processed = js.at("logs_processed").get<std::size_t>();

    Engine engine(cfg, std::move(backend), std::move(embedder), std::move(pool));
    engine.extractor().restore_counters(js.at("extraction_calls").get<std::size_t>(),
                                        js.at("merge_verify_calls").get<std::size_t>(),
                                        js.at("merge_check_calls").get<std::size_t>());
    engine.restore(std::move(r));
    return engine;
  } catch (const nlohmann::json::exception& e) {
    throw StateCorrupt(std::string("malformed state: ") + e.what());
  } catch (const EmptyContent& e) {
    throw StateCorrupt(std::string("malformed state: ") + e.what());
  }
}

inline std::string dump_state(const Engine& engine) { return state_to_json(engine).dump(1) + "\n"; }

// Written to a sibling temp file and renamed into place.
inline void save_state(const Engine& engine, const std::filesystem::path& path) {
  const std::string text = dump_state(engine);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write state file " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error("failed writing state file " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline Engine load_state(const std::filesystem::path& path, std::shared_ptr<ExtractionBackend> backend,
                         std::shared_ptr<Embedder> embedder) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StateCorrupt("cannot read state file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw StateCorrupt("state file " + path.string() + " is not valid JSON: " + e.what());
  }
  return state_from_json(j, std::move(backend), std::move(embedder));
}

}  // namespace logmill
