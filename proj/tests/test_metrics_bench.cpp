#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "logmill/bench.hpp"
#include "logmill/csv.hpp"
#include "logmill/dataset.hpp"
#include "logmill/metrics.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace logmill;
namespace fs = std::filesystem;

namespace {

ParsingResult result(const std::vector<std::pair<std::string, std::string>>& rows) {
  ParsingResult r;
  LineId id = 1;
  for (const auto& [group, tmpl] : rows) r.add(id++, group, tmpl);
  return r;
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "logmill_test_metrics" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Message m is grouped correctly iff the set of messages sharing its predicted
// group equals the set sharing its ground-truth group.
double brute_ga(const oracle::Partition& p, const oracle::Partition& q) {
  std::size_t ok = 0;
  for (std::size_t m = 0; m < p.size(); ++m) {
    bool same = true;
    for (std::size_t k = 0; k < p.size(); ++k) same &= (p[k] == p[m]) == (q[k] == q[m]);
    ok += same;
  }
  return p.empty() ? 1.0 : static_cast<double>(ok) / static_cast<double>(p.size());
}

std::size_t brute_exact_groups(const oracle::Partition& p, const oracle::Partition& q) {
  std::size_t n = 0;
  for (int b = 0; b < oracle::block_count(p); ++b) {
    std::set<std::size_t> mp, mq;
    std::optional<int> target;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == b) {
        mp.insert(i);
        target = q[i];
      }
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i] == *target) mq.insert(i);
    }
    n += mp == mq;
  }
  return n;
}

}  // namespace

// ---- metric fixtures

TEST(Metrics, FourMessageFixture) {
  const auto pred = result({{"p1", "a <*>"}, {"p1", "a <*>"}, {"p2", "c x"}, {"p3", "d y"}});
  const auto gt = result({{"g1", "a <*>"}, {"g1", "a <*>"}, {"g2", "c <*>"}, {"g2", "c <*>"}});
  const auto r = evaluate(pred, gt);
  EXPECT_EQ(r.ga, 0.5);
  EXPECT_EQ(r.fga, 0.4);
  EXPECT_EQ(r.nc, 1u);
  EXPECT_EQ(r.np, 3u);
  EXPECT_EQ(r.ng, 2u);
  EXPECT_DOUBLE_EQ(r.pga, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.rga, 0.5);
  EXPECT_EQ(r.pa, 0.5);
  EXPECT_EQ(r.fta, 0.4);
  EXPECT_EQ(r.ggd, 1);
  // one merge; "c x" vs "c <*>" toggles one token, "d y" vs "c <*>" two
  EXPECT_EQ(r.pgd, 4);
}

TEST(Metrics, GgdExamples) {
  // one split plus one merge
  EXPECT_EQ(ggd(result({{"a", ""}, {"a", ""}, {"b", ""}}), result({{"x", ""}, {"y", ""}, {"y", ""}})), 2);
  // split a 3-block into singletons
  EXPECT_EQ(ggd(result({{"a", ""}, {"a", ""}, {"a", ""}}), result({{"x", ""}, {"y", ""}, {"z", ""}})), 2);
  EXPECT_EQ(ggd(result({{"a", ""}, {"b", ""}}), result({{"x", ""}, {"y", ""}})), 0);
}

TEST(Metrics, PgdFixtures) {
  const auto gt = result({{"g", "read <*> ok"}, {"g", "read <*> ok"}});
  EXPECT_EQ(pgd(result({{"p", "read <*> ok"}, {"p", "read <*> ok"}}), gt), 0);
  EXPECT_EQ(pgd(result({{"p", "read x ok"}, {"p", "read x ok"}}), gt), 1);
  EXPECT_EQ(pgd(result({{"p", "<*>edec<*>e<*>-<*>-<*>a<*>a"}}), result({{"g", "<*>"}})), 0);
}

TEST(Metrics, ToggleCostCases) {
  EXPECT_EQ(toggle_cost("a b c", "a b c"), 0);
  EXPECT_EQ(toggle_cost("a <*> c", "a b c"), 1);
  EXPECT_EQ(toggle_cost("a <*> c", "a b <*> c"), 1);
  EXPECT_EQ(toggle_cost("a <*> c", "a <*> <*> c"), 0);
  EXPECT_EQ(toggle_cost("open <*>", "close <*>"), 1);
  EXPECT_EQ(toggle_cost("<OID> took <TDA> ms", "<*> took <*> ms"), 0);
  EXPECT_EQ(toggle_cost("", "a b"), 2);
}

TEST(Metrics, SymmetryAndIdentityOnRandomPartitions) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> tmpls{"a <*>", "a b", "<*> b", "a <*> <*>", "c"};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    ParsingResult p, q;
    for (std::size_t i = 0; i < n; ++i) {
      const auto gp = "p" + std::to_string(rng() % 4);
      const auto gq = "q" + std::to_string(rng() % 4);
      p.add(static_cast<LineId>(i), gp, tmpls[std::hash<std::string>{}(gp) % tmpls.size()]);
      q.add(static_cast<LineId>(i), gq, tmpls[std::hash<std::string>{}(gq) % tmpls.size()]);
    }
    EXPECT_EQ(ggd(p, q), ggd(q, p));
    EXPECT_EQ(pgd(p, q), pgd(q, p));
    EXPECT_GE(ggd(p, q), 0);
    EXPECT_GE(pgd(p, q), ggd(p, q));
    EXPECT_EQ(ggd(p, p), 0);
    EXPECT_EQ(pgd(p, p), 0);
    const auto self = evaluate(p, p);
    EXPECT_EQ(self.ga, 1.0);
    EXPECT_EQ(self.fga, 1.0);
    EXPECT_EQ(self.fta, 1.0);
  }
}

TEST(Metrics, AgreesWithBruteForceOnSmallPartitions) {
  for (int n = 0; n <= 5; ++n) {
    const auto parts = oracle::all_partitions(n);
    for (const auto& p : parts) {
      const auto dist = oracle::bfs_distances(p);
      for (const auto& q : parts) {
        const auto rp = oracle::as_result(p, "p");
        const auto rq = oracle::as_result(q, "q");
        ASSERT_EQ(ggd(rp, rq), dist.at(q));
        ASSERT_DOUBLE_EQ(grouping_accuracy(rp, rq), brute_ga(p, q));
        const auto fg = f_group(rp, rq);
        ASSERT_EQ(fg.correct, brute_exact_groups(p, q));
      }
    }
  }
}

TEST(Metrics, MismatchedLineSetsThrow) {
  const auto a = result({{"x", ""}, {"x", ""}});
  const auto b = result({{"x", ""}});
  EXPECT_THROW(evaluate(a, b), ResultMismatch);
  ParsingResult c;
  c.add(1, "x", "");
  c.add(7, "x", "");
  EXPECT_THROW(evaluate(a, c), ResultMismatch);
}

TEST(Metrics, JsonAndTable) {
  const auto r = evaluate(result({{"p", "a"}}), result({{"g", "a"}}));
  const auto j = to_json(r);
  EXPECT_EQ(j.begin().key(), "GA");
  EXPECT_EQ(j.at("GGD").get<long long>(), 0);
  const auto table = format_table({{"toy", r}});
  EXPECT_NE(table.find("dataset"), std::string::npos);
  EXPECT_NE(table.find("100.0"), std::string::npos);
}

// ---- csv

TEST(Csv, RoundTripWithQuoting) {
  const std::vector<CsvRow> rows{{"1", "plain", "E1", "plain"},
                                 {"2", "a,b", "E2", "say \"hi\""},
                                 {"3", " padded ", "E3", "multi\nline"},
                                 {"4", "", "", ""}};
  std::ostringstream out;
  for (const auto& r : rows) write_csv_row(out, r);
  EXPECT_EQ(parse_csv(out.str()), rows);
}

TEST(Csv, FuzzRoundTrip) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "ab ,\"\r\n<*>x";
  std::vector<CsvRow> rows;
  for (int r = 0; r < 400; ++r) {
    CsvRow row;
    for (int f = 0; f < 4; ++f) {
      std::string s;
      const std::size_t len = rng() % 8;
      for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
      row.push_back(s);
    }
    rows.push_back(row);
  }
  std::ostringstream out;
  for (const auto& r : rows) write_csv_row(out, r);
  EXPECT_EQ(parse_csv(out.str()), rows);
}

TEST(Csv, BomAndUnterminatedQuote) {
  EXPECT_EQ(parse_csv("\xEF\xBB\xBFLineId,Content\n1,x\n"), (std::vector<CsvRow>{{"LineId", "Content"}, {"1", "x"}}));
  EXPECT_THROW(parse_csv("a,\"open\n"), DatasetCorrupt);
}

TEST(Csv, StructuredFileChecks) {
  const auto dir = temp_dir("structured");
  {
    std::ofstream(dir / "missing.csv") << "LineId,Content,EventId\n1,x,E1\n";
    std::ofstream(dir / "badid.csv") << "LineId,Content,EventId,EventTemplate\nabc,x,E1,x\n";
    std::ofstream(dir / "dup.csv") << "LineId,Content,EventId,EventTemplate\n1,x,E1,x\n1,y,E1,y\n";
  }
  EXPECT_THROW(read_structured_csv(dir / "missing.csv"), DatasetCorrupt);
  EXPECT_THROW(read_structured_csv(dir / "badid.csv"), DatasetCorrupt);
  EXPECT_THROW(read_parsing_result(dir / "dup.csv"), std::exception);
}

// ---- dataset loading

TEST(Dataset, LogFormatExamples) {
  const LogFormat hdfs("<Date> <Time> <Level> <Content>");
  EXPECT_EQ(hdfs.content("081109 203615 INFO Receiving block").value(), "Receiving block");
  EXPECT_EQ(hdfs.headers(), (std::vector<std::string>{"Date", "Time", "Level", "Content"}));
  EXPECT_FALSE(hdfs.content("081109"));

  const LogFormat linux_fmt(synth::log_format(synth::Flavor::Linux));
  EXPECT_EQ(linux_fmt.content("Jun 9 06:06:20 combo syslogd[1138]: restart").value(), "restart");
  EXPECT_EQ(linux_fmt.content("Jun 9 06:06:20 combo kernel: Linux version 2.6").value(), "Linux version 2.6");

  const LogFormat apache(synth::log_format(synth::Flavor::Apache));
  EXPECT_EQ(apache.content("[Sun Dec 04 04:47:44 2005] [notice] workerEnv.init() ok").value(),
            "workerEnv.init() ok");
  EXPECT_THROW(LogFormat("<Date> <Level>"), Error);
}

TEST(Dataset, LoaderRoundTripsSyntheticFixture) {
  for (const auto flavor : {synth::Flavor::Hdfs, synth::Flavor::Apache, synth::Flavor::Linux}) {
    const auto ds = synth::generate("fx", flavor, 12, 400, 21);
    const auto spec = ds.write(temp_dir("load"));
    const auto loaded = load_dataset(spec);
    ASSERT_EQ(loaded.records.size(), ds.lines.size());
    EXPECT_EQ(loaded.header_mismatches, 0u);
    EXPECT_EQ(loaded.content_mismatches, 0u);
    for (std::size_t i = 0; i < ds.lines.size(); ++i) {
      EXPECT_EQ(loaded.records[i].record.line_id, static_cast<LineId>(i + 1));
      EXPECT_EQ(loaded.records[i].record.content, ds.lines[i].content);
    }
    EXPECT_TRUE(label_conflicts(loaded).empty());
    EXPECT_EQ(grouping_accuracy(loaded.ground_truth(), loaded.ground_truth()), 1.0);
  }
}

TEST(Dataset, LineCountMismatchIsCorrupt) {
  const auto ds = synth::generate("mm", synth::Flavor::Hdfs, 5, 50, 2);
  const auto spec = ds.write(temp_dir("mismatch"));
  std::ofstream(spec.log_path, std::ios::app) << "081109 000000 1 INFO x: extra line\n";
  EXPECT_THROW(load_dataset(spec), DatasetCorrupt);
}

TEST(Dataset, HeaderMismatchFallsBackToWholeLine) {
  const auto dir = temp_dir("header");
  std::ofstream(dir / "h.log") << "[Sun Dec 04 04:47:44 2005] [notice] ok\nno header here\n";
  std::ofstream(dir / "h.csv") << "LineId,Content,EventId,EventTemplate\n1,ok,E1,ok\n2,no header here,E2,no header here\n";
  const auto ds = load_dataset({"h", dir / "h.log", dir / "h.csv", "", synth::log_format(synth::Flavor::Apache)});
  EXPECT_EQ(ds.header_mismatches, 1u);
  EXPECT_TRUE(ds.records[1].header_mismatch);
  EXPECT_EQ(ds.records[1].record.content, "no header here");
}

TEST(Calibration, EvenSpacingFrozen) {
  const std::vector<std::size_t> expected{3,   9,   15,  21,  28,  34,  40,  46,  53,  59,  65,
                                          71,  78,  84,  90,  96,  103, 109, 115, 121, 128, 134,
                                          140, 146, 153, 159, 165, 171, 178, 184, 190, 196};
  EXPECT_EQ(even_spacing(200, 32), expected);
  EXPECT_EQ(even_spacing(9, 1), (std::vector<std::size_t>{4}));
  EXPECT_EQ(even_spacing(3, 5), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(even_spacing(0, 4).empty());
}

TEST(Calibration, SamplesFromFirstTenthByLength) {
  std::vector<LabeledRecord> records;
  for (std::size_t i = 0; i < 2000; ++i) {
    LabeledRecord r;
    r.record.line_id = static_cast<LineId>(i + 1);
    r.record.content = "w" + std::string(" x", i % 7);
    r.gt_template = r.record.content;
    records.push_back(r);
  }
  const auto s = sample_calibration_shots(records, 32);
  EXPECT_FALSE(s.short_dataset);
  ASSERT_EQ(s.pairs.size(), 32u);
  std::size_t prev_len = 0;
  for (const auto& p : s.pairs) {
    EXPECT_LE(p.record.line_id, 200);
    const auto len = split_whitespace(p.record.content).size();
    EXPECT_GE(len, prev_len);
    prev_len = len;
  }
  records.resize(100);
  const auto short_sample = sample_calibration_shots(records, 32);
  EXPECT_TRUE(short_sample.short_dataset);
  EXPECT_EQ(short_sample.pairs.size(), 10u);
}

// ---- benchmark runner

namespace {

Engine oracle_engine(const Dataset& ds, MergePolicy merge = MergePolicy::Auto) {
  auto embedder = std::make_shared<HashingEmbedder>();
  EngineConfig cfg;
  cfg.merge = merge;
  return Engine(cfg, oracle_from(ds), embedder, ExamplePool::with_default_seeds(*embedder));
}

}  // namespace

TEST(Bench, OracleRunIsPerfectAndConservesCalls) {
  const auto synthetic = synth::generate("bench", synth::Flavor::Hdfs, 30, 2000, 31);
  const auto ds = load_dataset(synthetic.write(temp_dir("bench")));
  Engine engine = oracle_engine(ds);
  BenchOptions opts;
  opts.assumed_latency_seconds = 2.0;
  const auto run = run_benchmark(ds, engine, opts);
  const auto& r = run.report;
  EXPECT_EQ(r.processed, 2000u);
  EXPECT_FALSE(r.partial);
  EXPECT_EQ(r.metrics.ga, 1.0);
  EXPECT_EQ(r.metrics.pa, 1.0);
  EXPECT_EQ(r.metrics.fga, 1.0);
  EXPECT_EQ(r.metrics.fta, 1.0);
  EXPECT_EQ(r.metrics.ggd, 0);
  EXPECT_EQ(r.metrics.pgd, 0);
  EXPECT_EQ(r.quarantined, 0u);
  EXPECT_LE(r.llm_calls, synthetic.distinct_syntax_templates());
  EXPECT_EQ(r.llm_calls, engine.stats().extraction_calls);
  EXPECT_DOUBLE_EQ(r.extraction_seconds_estimated,
                   2.0 * static_cast<double>(r.llm_calls + r.merge_verify_calls + r.merge_check_calls));
  EXPECT_GE(r.base_seconds, 0.0);
  const auto j = to_json(r, false);
  EXPECT_FALSE(j.contains("timing"));
  EXPECT_TRUE(to_json(r, true).contains("timing"));
}

TEST(Bench, DeterministicAcrossRuns) {
  const auto synthetic = synth::generate("det", synth::Flavor::Apache, 20, 1000, 41);
  const auto ds = load_dataset(synthetic.write(temp_dir("det")));
  std::string first;
  for (int i = 0; i < 3; ++i) {
    Engine engine = oracle_engine(ds);
    const auto run = run_benchmark(ds, engine);
    std::ostringstream out;
    write_structured_csv(out, run.parsed);
    const std::string text = out.str() + to_json(run.report, false).dump();
    if (i == 0) first = text;
    EXPECT_EQ(text, first);
  }
}

TEST(Bench, InterruptYieldsPartialReport) {
  const auto synthetic = synth::generate("int", synth::Flavor::Linux, 5, 100, 3);
  const auto ds = load_dataset(synthetic.write(temp_dir("int")));
  Engine engine = oracle_engine(ds);
  std::atomic<bool> stop{true};
  BenchOptions opts;
  opts.interrupt = &stop;
  const auto run = run_benchmark(ds, engine, opts);
  EXPECT_TRUE(run.report.partial);
  EXPECT_EQ(run.report.processed, 0u);
}

TEST(Bench, BlankAndQuarantinedRowsHaveEmptyEvent) {
  auto embedder = std::make_shared<HashingEmbedder>();
  Engine engine({}, std::make_shared<OracleBackend>(), embedder, ExamplePool::with_default_seeds(*embedder));
  const auto blank = parse_record(engine, {1, "  ", "  "});
  EXPECT_EQ(blank.event_id, "");
  const auto miss = parse_record(engine, {2, "unknown", "unknown"});
  EXPECT_EQ(miss.event_id, "");
  EXPECT_EQ(miss.event_template, "");
  EXPECT_EQ(engine.quarantined_count(), 1u);
}
