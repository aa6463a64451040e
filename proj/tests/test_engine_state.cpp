#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "logmill/backend.hpp"
#include "logmill/engine.hpp"
#include "logmill/state.hpp"
#include "support/synth.hpp"

using namespace logmill;
namespace fs = std::filesystem;

namespace {

// Oracle labels plus scripted merge answers.
class ScriptedBackend final : public ExtractionBackend {
 public:
  std::map<std::string, std::string> labels;
  std::string verify_reply = "Answer: No\nUnified Template: None";
  std::string check_reply = "Answer: No";
  std::size_t verify_calls = 0;

  std::string extraction_response(std::string_view log, const std::string&) override {
    const auto it = labels.find(std::string(log));
    if (it == labels.end()) throw OracleMiss(std::string(log));
    return "Parsed Log: " + it->second;
  }
  std::string merge_verify_response(std::span<const std::string>, const std::string&) override {
    ++verify_calls;
    return verify_reply;
  }
  std::string merge_check_response(std::string_view, std::span<const std::string>, const std::string&) override {
    return check_reply;
  }
};

Engine make_engine(std::shared_ptr<ExtractionBackend> backend, EngineConfig cfg = {}) {
  auto embedder = std::make_shared<HashingEmbedder>();
  auto pool = ExamplePool::with_default_seeds(*embedder);
  return Engine(cfg, std::move(backend), embedder, std::move(pool));
}

RawLogRecord rec(LineId id, std::string content) { return RawLogRecord{id, content, content}; }

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "logmill_test_engine";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void expect_pool_consistent(const Engine& e) {
  for (const auto& [text, id] : e.template_pool()) EXPECT_TRUE(e.cluster(id)) << text;
  for (const auto& [id, c] : e.clusters()) {
    const auto it = e.template_pool().find(c.log_template.text);
    ASSERT_NE(it, e.template_pool().end());
    EXPECT_EQ(it->second, id);
  }
}

}  // namespace

TEST(Engine, NewClusterThenStrictHit) {
  auto b = std::make_shared<ScriptedBackend>();
  b->labels = {{"open file 1", "open file <OID>"}};
  Engine e = make_engine(b);
  auto o = e.process_log(rec(1, "open file 1"));
  EXPECT_EQ(o.event, OutcomeEvent::NewCluster);
  EXPECT_EQ(o.llm_calls_used, 1u);
  o = e.process_log(rec(2, "open file 2"));
  EXPECT_EQ(o.event, OutcomeEvent::StrictHit);
  EXPECT_EQ(o.llm_calls_used, 0u);
  EXPECT_EQ(o.cluster_id, 1);
  const auto* c = e.cluster(1);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->member_ids, (std::vector<LineId>{1, 2}));
  EXPECT_EQ(e.stats().extraction_calls, 1u);
}

TEST(Engine, VariantAddedForKnownTemplate) {
  auto b = std::make_shared<ScriptedBackend>();
  b->labels = {{"user alpha logged in", "user <*> logged in"}, {"user alpha bravo logged in", "user <OID> logged in"}};
  Engine e = make_engine(b);
  EXPECT_EQ(e.process_log(rec(1, "user alpha logged in")).event, OutcomeEvent::NewCluster);
  const auto o = e.process_log(rec(2, "user alpha bravo logged in"));
  EXPECT_EQ(o.event, OutcomeEvent::VariantAdded);
  EXPECT_EQ(o.cluster_id, 1);
  EXPECT_EQ(e.cluster(1)->variant_count(), 2u);
  EXPECT_EQ(e.process_log(rec(3, "user x y logged in")).event, OutcomeEvent::StrictHit);
}

TEST(Engine, LooseCandidateMergedAfterVerifyAndCheck) {
  auto b = std::make_shared<ScriptedBackend>();
  b->labels = {{"conn host:80", "conn <*>:<*>"}, {"conn localhost", "conn <*>"}};
  b->verify_reply = "Reason: same\nAnswer: Yes\nUnified Template: conn <*>";
  b->check_reply = "Answer: yes";
  Engine e = make_engine(b);
  e.process_log(rec(1, "conn host:80"));
  const auto m = e.search(tokenize("conn localhost"));
  EXPECT_EQ(m.kind, MatchKind::Loose);
  const auto o = e.process_log(rec(2, "conn localhost"));
  EXPECT_EQ(o.event, OutcomeEvent::Merged);
  EXPECT_EQ(o.cluster_id, 1);
  EXPECT_EQ(o.llm_calls_used, 3u);
  EXPECT_EQ(e.clusters().size(), 1u);
  EXPECT_EQ(e.cluster(1)->log_template.text, "conn <*>");
  EXPECT_EQ(e.template_pool().count("conn <*>:<*>"), 1u);  // old key kept
  EXPECT_EQ(e.template_pool().at("conn <*>"), 1);
  EXPECT_EQ(e.process_log(rec(3, "conn other")).event, OutcomeEvent::StrictHit);
  expect_pool_consistent(e);
}

TEST(Engine, RejectedMergeCreatesCluster) {
  auto b = std::make_shared<ScriptedBackend>();
  b->labels = {{"conn host:80", "conn <*>:<*>"}, {"conn localhost", "conn <*>"}};
  Engine e = make_engine(b);
  e.process_log(rec(1, "conn host:80"));
  EXPECT_EQ(e.process_log(rec(2, "conn localhost")).event, OutcomeEvent::NewCluster);
  EXPECT_EQ(b->verify_calls, 1u);
  EXPECT_EQ(e.stats().merge_check_calls, 0u);
}

TEST(Engine, MergeOffMakesNoVerifyCalls) {
  auto b = std::make_shared<ScriptedBackend>();
  b->labels = {{"conn host:80", "conn <*>:<*>"}, {"conn localhost", "conn <*>"}};
  b->verify_reply = "Answer: Yes\nUnified Template: conn <*>";
  b->check_reply = "Answer: yes";
  EngineConfig cfg;
  cfg.merge = MergePolicy::Off;
  Engine e = make_engine(b, cfg);
  e.process_log(rec(1, "conn host:80"));
  EXPECT_EQ(e.process_log(rec(2, "conn localhost")).event, OutcomeEvent::NewCluster);
  EXPECT_EQ(e.stats().merge_verify_calls, 0u);
}

TEST(Engine, InteractiveHookDecidesWithoutLlm) {
  auto b = std::make_shared<ScriptedBackend>();
  b->labels = {{"conn host:80", "conn <*>:<*>"}, {"conn localhost", "conn <*>"}};
  EngineConfig cfg;
  cfg.merge = MergePolicy::Interactive;
  Engine e = make_engine(b, cfg);
  int asked = 0;
  e.set_calibration_hook([&](const MergeQuery& q) {
    ++asked;
    EXPECT_EQ(q.cluster.id, 1);
    EXPECT_EQ(q.extracted.text, "conn <*>");
    MergeDecision d;
    d.answer = true;
    d.unified_template = normalize_template("conn <*>");
    return d;
  });
  e.process_log(rec(1, "conn host:80"));
  EXPECT_EQ(e.process_log(rec(2, "conn localhost")).event, OutcomeEvent::Merged);
  EXPECT_EQ(asked, 1);
  EXPECT_EQ(b->verify_calls, 0u);
}

TEST(Engine, ExtractorMissQuarantinesAndReprocesses) {
  auto b = std::make_shared<ScriptedBackend>();
  Engine e = make_engine(b);
  const auto o = e.process_log(rec(1, "mystery 1"));
  EXPECT_EQ(o.event, OutcomeEvent::Quarantined);
  EXPECT_FALSE(o.cluster_id);
  EXPECT_EQ(e.quarantined_count(), 1u);
  b->labels["mystery 1"] = "mystery <*>";
  const auto again = e.reprocess_quarantine();
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(again[0].event, OutcomeEvent::NewCluster);
  EXPECT_EQ(e.quarantined_count(), 0u);
}

TEST(Engine, AllVariableTemplateFlagged) {
  auto b = std::make_shared<ScriptedBackend>();
  b->labels = {{"x1 y2", "<OID> <LOI>"}};
  Engine e = make_engine(b);
  e.process_log(rec(1, "x1 y2"));
  EXPECT_TRUE(e.cluster(1)->flags.count(cluster_flag::kAllVariable));
}

TEST(Engine, AlignmentFailureFallsBackToWildcards) {
  auto b = std::make_shared<ScriptedBackend>();
  b->labels = {{"alpha 1", "beta <*>"}};
  Engine e = make_engine(b);
  e.process_log(rec(1, "alpha 1"));
  const auto* c = e.cluster(1);
  EXPECT_TRUE(c->flags.count(cluster_flag::kAlignmentFallback));
  EXPECT_EQ(c->syntax_variants.at(2).front().entries, (std::vector<std::string>{"<*>", "<*>"}));
}

TEST(Engine, EmptyContentIsRejected) {
  Engine e = make_engine(std::make_shared<ScriptedBackend>());
  EXPECT_THROW(e.process_log(rec(1, "   ")), EmptyContent);
}

TEST(Generalize, PositionalAndLcs) {
  EXPECT_EQ(generalize_templates("a 1 b", "a 2 b")->text, "a <*> b");
  EXPECT_EQ(generalize_templates("a x y b", "a z b")->text, "a <*> b");
  EXPECT_FALSE(generalize_templates("p q", "r s"));
}

TEST(Engine, PostMergeContract) {
  auto b = std::make_shared<ScriptedBackend>();
  b->labels = {{"disk sda full", "disk sda full"}, {"disk sdb full", "disk sdb full"}, {"net up", "net up"}};
  Engine e = make_engine(b);
  e.process_log(rec(1, "disk sda full"));
  e.process_log(rec(2, "disk sdb full"));
  e.process_log(rec(3, "net up"));
  EXPECT_TRUE(e.suggest_post_merges(1.01).empty());
  const auto s = e.suggest_post_merges(0.0);
  ASSERT_FALSE(s.empty());
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GE(s[i - 1].score, s[i].score);
  const auto unified = generalize_templates("disk sda full", "disk sdb full");
  ASSERT_TRUE(unified);
  e.merge_clusters(1, 2, *unified);
  EXPECT_EQ(e.clusters().size(), 2u);
  EXPECT_EQ(e.template_pool().at("disk <*> full"), 1);
  EXPECT_EQ(e.template_pool().at("disk sdb full"), 1);
  EXPECT_EQ(e.cluster(1)->member_count, 2u);
  EXPECT_EQ(e.process_log(rec(4, "disk sdb full")).cluster_id, 1);
  expect_pool_consistent(e);
  EXPECT_THROW(e.merge_clusters(1, 1, *unified), std::invalid_argument);
}

// ---- engine invariants on synthetic streams

TEST(Engine, CallsBoundedBySyntaxTemplatesAndMembersConserved) {
  const auto ds = synth::generate("inv", synth::Flavor::Hdfs, 20, 3000, 5);
  auto oracle = std::make_shared<OracleBackend>();
  for (const auto& l : ds.lines) oracle->add(l.content, ds.templates[l.template_index].text);
  Engine e = make_engine(oracle);
  std::size_t processed = 0;
  for (const auto& l : ds.lines) {
    e.process_log(rec(static_cast<LineId>(++processed), l.content));
  }
  EXPECT_LE(e.stats().extraction_calls, ds.distinct_syntax_templates());
  std::size_t members = 0;
  for (const auto& [id, c] : e.clusters()) members += c.member_count;
  EXPECT_EQ(members, processed);
  expect_pool_consistent(e);
}

// ---- persistence

namespace {

struct SynthRun {
  synth::Dataset ds;
  std::shared_ptr<OracleBackend> oracle = std::make_shared<OracleBackend>();

  explicit SynthRun(std::uint64_t seed, std::size_t lines = 1500)
      : ds(synth::generate("st", synth::Flavor::Linux, 25, lines, seed)) {
    for (const auto& l : ds.lines) oracle->add(l.content, ds.templates[l.template_index].text);
  }
};

}  // namespace

TEST(State, DumpLoadDumpIsByteIdentical) {
  SynthRun run(3);
  Engine e = make_engine(run.oracle);
  for (std::size_t i = 0; i < 800; ++i) e.process_log(rec(static_cast<LineId>(i + 1), run.ds.lines[i].content));
  const auto path = temp_dir() / "state.json";
  save_state(e, path);
  const Engine loaded = load_state(path, run.oracle, std::make_shared<HashingEmbedder>());
  EXPECT_EQ(dump_state(loaded), slurp(path));
  EXPECT_EQ(loaded.stats().extraction_calls, e.stats().extraction_calls);
  EXPECT_EQ(loaded.next_cluster_id(), e.next_cluster_id());
}

TEST(State, SearchEquivalentOnProbes) {
  SynthRun run(4, 2500);
  Engine e = make_engine(run.oracle);
  for (std::size_t i = 0; i < 1500; ++i) e.process_log(rec(static_cast<LineId>(i + 1), run.ds.lines[i].content));
  const auto path = temp_dir() / "probe_state.json";
  save_state(e, path);
  const Engine loaded = load_state(path, run.oracle, std::make_shared<HashingEmbedder>());
  std::size_t divergences = 0;
  for (std::size_t i = 1500; i < 2500; ++i) {
    const auto tokens = tokenize(run.ds.lines[i].content);
    const auto a = e.search(tokens);
    const auto b = loaded.search(tokens);
    if (a.kind != b.kind || a.strict_cluster != b.strict_cluster || a.loose_candidates != b.loose_candidates) {
      ++divergences;
    }
  }
  EXPECT_EQ(divergences, 0u);
}

TEST(State, ContinuationMatchesUninterruptedRun) {
  SynthRun run(8, 2000);
  Engine straight = make_engine(run.oracle);
  Engine first = make_engine(run.oracle);
  std::vector<ParseOutcome> expected;
  for (std::size_t i = 0; i < 2000; ++i) {
    expected.push_back(straight.process_log(rec(static_cast<LineId>(i + 1), run.ds.lines[i].content)));
  }
  for (std::size_t i = 0; i < 1000; ++i) first.process_log(rec(static_cast<LineId>(i + 1), run.ds.lines[i].content));
  const auto path = temp_dir() / "continue.json";
  save_state(first, path);
  Engine resumed = load_state(path, run.oracle, std::make_shared<HashingEmbedder>());
  for (std::size_t i = 1000; i < 2000; ++i) {
    const auto o = resumed.process_log(rec(static_cast<LineId>(i + 1), run.ds.lines[i].content));
    EXPECT_EQ(o.cluster_id, expected[i].cluster_id) << i;
    EXPECT_EQ(o.event, expected[i].event) << i;
  }
  EXPECT_EQ(dump_state(resumed), dump_state(straight));
}

TEST(State, CorruptFilesAreRejected) {
  SynthRun run(9, 300);
  Engine e = make_engine(run.oracle);
  for (std::size_t i = 0; i < 300; ++i) e.process_log(rec(static_cast<LineId>(i + 1), run.ds.lines[i].content));
  const std::string text = dump_state(e);
  const auto path = temp_dir() / "corrupt.json";
  auto embedder = std::make_shared<HashingEmbedder>();

  std::ofstream(path, std::ios::binary | std::ios::trunc) << text.substr(0, text.size() / 2);
  EXPECT_THROW(load_state(path, run.oracle, embedder), StateCorrupt);

  auto j = nlohmann::json::parse(text);
  j["version"] = 99;
  std::ofstream(path, std::ios::binary | std::ios::trunc) << j.dump();
  EXPECT_THROW(load_state(path, run.oracle, embedder), StateVersionError);

  j = nlohmann::json::parse(text);
  j["template_pool"]["bogus <*>"] = 424242;
  std::ofstream(path, std::ios::binary | std::ios::trunc) << j.dump();
  EXPECT_THROW(load_state(path, run.oracle, embedder), StateCorrupt);

  j = nlohmann::json::parse(text);
  j["clusters"][0].erase("variants");
  std::ofstream(path, std::ios::binary | std::ios::trunc) << j.dump();
  EXPECT_THROW(load_state(path, run.oracle, embedder), StateCorrupt);

  EXPECT_THROW(load_state(temp_dir() / "missing.json", run.oracle, embedder), StateCorrupt);
}
