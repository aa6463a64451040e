#pragma once

// Streaming parser: routes each log through the prefix tree and only calls the
// extractor when no cluster matches strictly. Owns the cluster store, the
// template pool and the tree, and keeps them consistent.

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "logmill/extractor.hpp"
#include "logmill/model.hpp"
#include "logmill/tree.hpp"

namespace logmill {

enum class MergePolicy { Auto, Interactive, Off };

inline std::string_view to_string(MergePolicy p) {
  switch (p) {
    case MergePolicy::Auto: return "auto";
    case MergePolicy::Interactive: return "interactive";
    case MergePolicy::Off: return "off";
  }
  return "auto";
}

inline std::optional<MergePolicy> parse_merge_policy(std::string_view s) {
  if (s == "auto") return MergePolicy::Auto;
  if (s == "interactive") return MergePolicy::Interactive;
  if (s == "off" || s == "always-no") return MergePolicy::Off;
  return std::nullopt;
}

enum class OutcomeEvent { StrictHit, VariantAdded, Merged, NewCluster, Quarantined };

inline std::string_view to_string(OutcomeEvent e) {
  switch (e) {
    case OutcomeEvent::StrictHit: return "StrictHit";
    case OutcomeEvent::VariantAdded: return "VariantAdded";
    case OutcomeEvent::Merged: return "Merged";
    case OutcomeEvent::NewCluster: return "NewCluster";
    case OutcomeEvent::Quarantined: return "Quarantined";
  }
  return "";
}

namespace cluster_flag {
inline constexpr const char* kAllVariable = "all-variable";
inline constexpr const char* kAlignmentFallback = "alignment-fallback";
inline constexpr const char* kExtractionFallback = "extraction-fallback";
}  // namespace cluster_flag

struct LogCluster {
  static constexpr std::size_t kMaxSamples = 3;

  ClusterId id = 0;
  LogTemplate log_template;
  VariantMap syntax_variants;
  std::vector<LineId> member_ids;  // empty when id retention is off
  std::size_t member_count = 0;
  Embedding embedding;
  std::vector<std::string> samples;  // first few member contents
  std::set<std::string> flags;

  bool add_variant(SyntaxTemplate st) {
    auto& list = syntax_variants[st.token_count()];
    if (std::find(list.begin(), list.end(), st) != list.end()) return false;
    list.push_back(std::move(st));
    return true;
  }

  std::size_t variant_count() const {
    std::size_t n = 0;
    for (const auto& [count, list] : syntax_variants) n += list.size();
    return n;
  }
};

struct ParseOutcome {
  LineId line_id = 0;
  std::optional<ClusterId> cluster_id;
  OutcomeEvent event = OutcomeEvent::NewCluster;
  std::size_t llm_calls_used = 0;

  friend bool operator==(const ParseOutcome&, const ParseOutcome&) = default;
};

struct EngineStats {
  std::size_t logs_processed = 0;
  std::size_t extraction_calls = 0;
  std::size_t merge_verify_calls = 0;
  std::size_t merge_check_calls = 0;
  std::size_t clusters = 0;
  std::size_t quarantined = 0;
  double wall_seconds = 0.0;
  double extractor_seconds = 0.0;
};

// What a human (or a scripted stand-in) sees when asked about a merge.
struct MergeQuery {
  const RawLogRecord& record;
  const LogTemplate& extracted;
  const LogCluster& cluster;
  std::optional<LogTemplate> proposal;
};

using CalibrationHook = std::function<MergeDecision(const MergeQuery&)>;

struct MergeSuggestion {
  ClusterId first = 0;
  ClusterId second = 0;
  double score = 0.0;
};

struct EngineConfig {
  std::size_t shots = Extractor::kDefaultShots;
  std::size_t depth_cap = PrefixTree::kDefaultDepthCap;
  MergePolicy merge = MergePolicy::Auto;
  bool retain_member_ids = true;
  std::size_t example_pool_cap = ExamplePool::kDefaultCap;
  std::size_t merge_sample_logs = 2;
};

// Token-level generalization of two templates: shared tokens stay, the rest
// becomes `<*>`. Empty when nothing static survives.
inline std::optional<LogTemplate> generalize_templates(std::string_view a, std::string_view b) {
  const auto ta = split_whitespace(a);
  const auto tb = split_whitespace(b);
  std::vector<std::string> out;
  if (ta.size() == tb.size()) {
    for (std::size_t i = 0; i < ta.size(); ++i) out.push_back(ta[i] == tb[i] ? ta[i] : std::string(kWildcard));
  } else {
    std::vector<std::vector<std::size_t>> lcs(ta.size() + 1, std::vector<std::size_t>(tb.size() + 1, 0));
    for (std::size_t i = ta.size(); i-- > 0;) {
      for (std::size_t j = tb.size(); j-- > 0;) {
        lcs[i][j] = ta[i] == tb[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
      }
    }
    std::size_t i = 0, j = 0;
    bool gap = false;
    while (i < ta.size() || j < tb.size()) {
      if (i < ta.size() && j < tb.size() && ta[i] == tb[j]) {
        if (gap) out.emplace_back(kWildcard);
        gap = false;
        out.push_back(ta[i]);
        ++i;
        ++j;
      } else if (j == tb.size() || (i < ta.size() && lcs[i + 1][j] >= lcs[i][j + 1])) {
        gap = true;
        ++i;
      } else {
        gap = true;
        ++j;
      }
    }
    if (gap) out.emplace_back(kWildcard);
  }
  if (out.empty()) return std::nullopt;
  LogTemplate t = normalize_template(join_tokens(out));
  if (!has_static_token(t.text)) return std::nullopt;
  return t;
}

class Engine {
 public:
  Engine(EngineConfig config, std::shared_ptr<ExtractionBackend> backend, std::shared_ptr<Embedder> embedder,
         ExamplePool pool)
      : config_(config),
        extractor_(std::make_unique<Extractor>(std::move(backend), std::move(embedder), std::move(pool),
                                               config.shots)),
        tree_(config.depth_cap) {}

  Engine(Engine&&) noexcept = default;
  Engine& operator=(Engine&&) noexcept = default;

  ParseOutcome process_log(RawLogRecord record) {
    const auto start = std::chrono::steady_clock::now();
    ++logs_processed_;
    ParseOutcome outcome = route(std::move(record));
    wall_ += std::chrono::steady_clock::now() - start;
    return outcome;
  }

  // Re-runs quarantined logs in line order; those that fail again return to
  // quarantine.
  std::vector<ParseOutcome> reprocess_quarantine() {
    std::vector<RawLogRecord> pending;
    for (auto& [count, list] : quarantine_) {
      for (auto& r : list) pending.push_back(std::move(r));
    }
    quarantine_.clear();
    std::sort(pending.begin(), pending.end(),
              [](const RawLogRecord& a, const RawLogRecord& b) { return a.line_id < b.line_id; });
    std::vector<ParseOutcome> out;
    for (auto& r : pending) out.push_back(route(std::move(r)));
    return out;
  }

  // ClusterLookup surface for the tree.
  const VariantMap* syntax_variants(ClusterId id) const {
    const auto it = clusters_.find(id);
    return it == clusters_.end() ? nullptr : &it->second.syntax_variants;
  }
  std::size_t member_count(ClusterId id) const {
    const auto it = clusters_.find(id);
    return it == clusters_.end() ? 0 : it->second.member_count;
  }
  std::vector<ClusterId> cluster_ids() const {
    std::vector<ClusterId> ids;
    ids.reserve(clusters_.size());
    for (const auto& [id, c] : clusters_) ids.push_back(id);
    return ids;
  }

  MatchResult search(std::span<const std::string> tokens) const { return tree_.search(tokens, *this); }

  std::size_t prune_stale() { return tree_.prune_stale(*this); }

  std::vector<MergeSuggestion> suggest_post_merges(double floor) const {
    std::vector<MergeSuggestion> out;
    for (auto a = clusters_.begin(); a != clusters_.end(); ++a) {
      if (a->second.embedding.empty()) continue;
      for (auto b = std::next(a); b != clusters_.end(); ++b) {
        if (b->second.embedding.empty() || b->second.embedding.size() != a->second.embedding.size()) continue;
        const double score = cosine_similarity(a->second.embedding, b->second.embedding);
        if (score >= floor) out.push_back({a->first, b->first, score});
      }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const MergeSuggestion& x, const MergeSuggestion& y) { return x.score > y.score; });
    return out;
  }

  // Folds `absorb` into `keep` under `unified`. Both clusters' syntax variants
  // are retained; every pool key of `absorb` is redirected to `keep`.
  void merge_clusters(ClusterId keep, ClusterId absorb, const LogTemplate& unified) {
    if (keep == absorb) throw std::invalid_argument("cannot merge a cluster with itself");
    auto ki = clusters_.find(keep);
    auto ai = clusters_.find(absorb);
    if (ki == clusters_.end() || ai == clusters_.end()) throw std::invalid_argument("unknown cluster id");
    if (const auto it = pool_.find(unified.text); it != pool_.end() && it->second != keep && it->second != absorb) {
      throw Error("template '" + unified.text + "' already belongs to cluster " + std::to_string(it->second));
    }
    LogCluster& k = ki->second;
    LogCluster& a = ai->second;
    k.log_template = unified;
    k.member_ids.insert(k.member_ids.end(), a.member_ids.begin(), a.member_ids.end());
    std::sort(k.member_ids.begin(), k.member_ids.end());
    k.member_count += a.member_count;
    for (auto& [count, list] : a.syntax_variants) {
      for (auto& st : list) {
        tree_.insert(st, keep);
        k.add_variant(std::move(st));
      }
    }
    for (auto& s : a.samples) {
      if (k.samples.size() < LogCluster::kMaxSamples) k.samples.push_back(std::move(s));
    }
    k.flags.insert(a.flags.begin(), a.flags.end());
    if (unified.all_variable) k.flags.insert(cluster_flag::kAllVariable);
    for (auto& [text, id] : pool_) {
      if (id == absorb) id = keep;
    }
    pool_[unified.text] = keep;
    clusters_.erase(ai);
    tree_.prune_stale(*this);
  }

  const std::map<ClusterId, LogCluster>& clusters() const noexcept { return clusters_; }
  const LogCluster* cluster(ClusterId id) const {
    const auto it = clusters_.find(id);
    return it == clusters_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, ClusterId>& template_pool() const noexcept { return pool_; }
  const std::map<std::size_t, std::vector<RawLogRecord>>& quarantine() const noexcept { return quarantine_; }
  const PrefixTree& tree() const noexcept { return tree_; }
  const EngineConfig& config() const noexcept { return config_; }
  Extractor& extractor() noexcept { return *extractor_; }
  const Extractor& extractor() const noexcept { return *extractor_; }

  void set_merge_policy(MergePolicy policy) { config_.merge = policy; }
  void set_calibration_hook(CalibrationHook hook) { hook_ = std::move(hook); }

  std::size_t quarantined_count() const {
    std::size_t n = 0;
    for (const auto& [count, list] : quarantine_) n += list.size();
    return n;
  }

  EngineStats stats() const {
    const auto& c = extractor_->counters();
    EngineStats s;
    s.logs_processed = logs_processed_;
    s.extraction_calls = c.extraction_calls;
    s.merge_verify_calls = c.merge_verify_calls;
    s.merge_check_calls = c.merge_check_calls;
    s.clusters = clusters_.size();
    s.quarantined = quarantined_count();
    s.wall_seconds = std::chrono::duration<double>(wall_).count();
    s.extractor_seconds = static_cast<double>(c.backend_nanos.load()) * 1e-9;
    return s;
  }

  // Restoration hooks used when loading persisted state.
  struct Restored {
    std::map<ClusterId, LogCluster> clusters;
    std::map<std::string, ClusterId> pool;
    std::map<std::size_t, std::vector<RawLogRecord>> quarantine;
    ClusterId next_id = 1;
    std::size_t logs_processed = 0;
  };
  void restore(Restored r) {
    clusters_ = std::move(r.clusters);
    pool_ = std::move(r.pool);
    quarantine_ = std::move(r.quarantine);
    next_id_ = r.next_id;
    logs_processed_ = r.logs_processed;
    tree_ = PrefixTree::rebuild(*this, config_.depth_cap);
  }
  ClusterId next_cluster_id() const noexcept { return next_id_; }

 private:
  std::size_t total_calls() const {
    const auto& c = extractor_->counters();
    return c.extraction_calls + c.merge_verify_calls + c.merge_check_calls;
  }

  void add_member(LogCluster& cluster, const RawLogRecord& record) {
    if (config_.retain_member_ids) cluster.member_ids.push_back(record.line_id);
    ++cluster.member_count;
    if (cluster.samples.size() < LogCluster::kMaxSamples) cluster.samples.push_back(record.content);
  }

  // Adds the variant this log implies under `tmpl` and links it in the tree.
  void attach_variant(LogCluster& cluster, std::span<const std::string> tokens, const LogTemplate& tmpl) {
    SyntaxTemplate st;
    try {
      st = derive_syntax_template(tokens, tmpl);
    } catch (const AlignmentError&) {
      st = wildcard_syntax_template(tokens.size());
      cluster.flags.insert(cluster_flag::kAlignmentFallback);
    }
    tree_.insert(st, cluster.id);
    cluster.add_variant(std::move(st));
  }

  std::optional<MergeDecision> decide_merge(const RawLogRecord& record, const LogTemplate& extracted,
                                            const LogCluster& cluster) {
    std::vector<std::string> logs;
    for (const auto& s : cluster.samples) {
      if (logs.size() >= config_.merge_sample_logs) break;
      logs.push_back(s);
    }
    logs.push_back(record.content);
    if (config_.merge == MergePolicy::Interactive) {
      if (!hook_) return std::nullopt;
      MergeDecision d = hook_(MergeQuery{record, extracted, cluster,
                                         generalize_templates(cluster.log_template.text, extracted.text)});
      if (!d.answer || !d.unified_template) return std::nullopt;
      return d;
    }
    MergeDecision d;
    try {
      d = extractor_->verify_merge(logs);
    } catch (const MergeParseError&) {
      return std::nullopt;
    }
    if (!d.answer || !d.unified_template) return std::nullopt;
    if (!extractor_->check_template_applies(*d.unified_template, logs)) return std::nullopt;
    return d;
  }

  ParseOutcome route(RawLogRecord record) {
    const std::size_t calls_before = total_calls();
    ParseOutcome outcome;
    outcome.line_id = record.line_id;
    const auto tokens = tokenize(record.content);
    const MatchResult match = tree_.search(tokens, *this);
    if (match.stale_refs > 0) tree_.prune_stale(*this);

    if (match.kind == MatchKind::Strict) {
      add_member(clusters_.at(*match.strict_cluster), record);
      outcome.cluster_id = match.strict_cluster;
      outcome.event = OutcomeEvent::StrictHit;
      return outcome;
    }

    Extraction extraction;
    try {
      extraction = extractor_->extract_template(record.content);
    } catch (const ExtractionUnavailable&) {
      return quarantine(std::move(record), tokens.size(), calls_before);
    } catch (const OracleMiss&) {
      return quarantine(std::move(record), tokens.size(), calls_before);
    } catch (const ReplayMiss&) {
      return quarantine(std::move(record), tokens.size(), calls_before);
    }
    const LogTemplate& tmpl = extraction.tmpl;

    if (const auto hit = pool_.find(tmpl.text); hit != pool_.end()) {
      LogCluster& cluster = clusters_.at(hit->second);
      attach_variant(cluster, tokens, tmpl);
      add_member(cluster, record);
      outcome.cluster_id = cluster.id;
      outcome.event = OutcomeEvent::VariantAdded;
      outcome.llm_calls_used = total_calls() - calls_before;
      return outcome;
    }

    if (config_.merge != MergePolicy::Off) {
      for (ClusterId candidate : match.loose_candidates) {
        LogCluster& cluster = clusters_.at(candidate);
        const auto decision = decide_merge(record, tmpl, cluster);
        if (!decision) continue;
        const LogTemplate& unified = *decision->unified_template;
        if (const auto owner = pool_.find(unified.text); owner != pool_.end() && owner->second != candidate) {
          continue;
        }
        cluster.log_template = unified;
        if (unified.all_variable) cluster.flags.insert(cluster_flag::kAllVariable);
        attach_variant(cluster, tokens, unified);
        add_member(cluster, record);
        pool_[unified.text] = candidate;
        outcome.cluster_id = candidate;
        outcome.event = OutcomeEvent::Merged;
        outcome.llm_calls_used = total_calls() - calls_before;
        return outcome;
      }
    }

    LogCluster cluster;
    cluster.id = next_id_++;
    cluster.log_template = tmpl;
    cluster.embedding = std::move(extraction.embedding);
    if (tmpl.all_variable) cluster.flags.insert(cluster_flag::kAllVariable);
    if (extraction.fallback) cluster.flags.insert(cluster_flag::kExtractionFallback);
    attach_variant(cluster, tokens, tmpl);
    add_member(cluster, record);
    pool_[tmpl.text] = cluster.id;
    outcome.cluster_id = cluster.id;
    outcome.event = OutcomeEvent::NewCluster;
    clusters_.emplace(cluster.id, std::move(cluster));
    outcome.llm_calls_used = total_calls() - calls_before;
    return outcome;
  }

  ParseOutcome quarantine(RawLogRecord record, std::size_t token_count, std::size_t calls_before) {
    ParseOutcome outcome;
    outcome.line_id = record.line_id;
    outcome.event = OutcomeEvent::Quarantined;
    quarantine_[token_count].push_back(std::move(record));
    outcome.llm_calls_used = total_calls() - calls_before;
    return outcome;
  }

  EngineConfig config_;
  std::unique_ptr<Extractor> extractor_;
  PrefixTree tree_;
  std::map<ClusterId, LogCluster> clusters_;
  std::map<std::string, ClusterId> pool_;
  std::map<std::size_t, std::vector<RawLogRecord>> quarantine_;
  CalibrationHook hook_;
  ClusterId next_id_ = 1;
  std::size_t logs_processed_ = 0;
  std::chrono::steady_clock::duration wall_{};
};

}  // namespace logmill
