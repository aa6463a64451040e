#pragma once

// Prefix parse tree over syntax-template entries. Nodes carry references to
// the clusters whose (possibly depth-truncated) path ends there; the search
// shortlists those clusters and classifies the best outcome.

#include <algorithm>
#include <concepts>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "logmill/model.hpp"

namespace logmill {

using VariantMap = std::map<std::size_t, std::vector<SyntaxTemplate>>;

// Read access the tree needs from whatever owns the clusters. A missing
// cluster is reported as a null variant map.
template <class Store>
concept ClusterLookup = requires(const Store& s, ClusterId id) {
  { s.syntax_variants(id) } -> std::convertible_to<const VariantMap*>;
  { s.member_count(id) } -> std::convertible_to<std::size_t>;
};

template <class Store>
concept EnumerableClusters = ClusterLookup<Store> && requires(const Store& s) {
  { s.cluster_ids() } -> std::convertible_to<std::vector<ClusterId>>;
};

struct MatchResult {
  MatchKind kind = MatchKind::None;
  std::optional<ClusterId> strict_cluster;
  std::vector<ClusterId> loose_candidates;
  std::size_t nodes_visited = 0;
  std::size_t stale_refs = 0;
};

class TreeNode {
 public:
  TreeNode() = default;
  explicit TreeNode(std::string key) : key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }
  const std::set<ClusterId>& cluster_refs() const noexcept { return refs_; }
  std::size_t child_count() const noexcept { return children_.size(); }

  const TreeNode* find_child(std::string_view key) const {
    const auto it = children_.find(key);
    return it == children_.end() ? nullptr : it->second.get();
  }

 private:
  friend class PrefixTree;

  TreeNode& child(const std::string& key, std::size_t& created) {
    auto it = children_.find(key);
    if (it != children_.end()) return *it->second;
    ++created;
    auto node = std::make_unique<TreeNode>(key);
    TreeNode& ref = *node;
    children_.emplace(key, std::move(node));
    if (has_wildcard(key)) wildcard_children_.push_back(&ref);
    return ref;
  }

  void erase_child(const std::string& key) {
    const auto it = children_.find(key);
    if (it == children_.end()) return;
    std::erase(wildcard_children_, it->second.get());
    children_.erase(it);
  }

  std::string key_;
  std::map<std::string, std::unique_ptr<TreeNode>, std::less<>> children_;
  // Children whose key contains `<*>`; they match any token during traversal.
  std::vector<TreeNode*> wildcard_children_;
  std::set<ClusterId> refs_;
};

class PrefixTree {
 public:
  static constexpr std::size_t kDefaultDepthCap = 16;

  explicit PrefixTree(std::size_t depth_cap = kDefaultDepthCap) : depth_cap_(std::max<std::size_t>(depth_cap, 1)) {}

  PrefixTree(PrefixTree&&) noexcept = default;
  PrefixTree& operator=(PrefixTree&&) noexcept = default;

  std::size_t depth_cap() const noexcept { return depth_cap_; }
  std::size_t node_count() const noexcept { return node_count_; }
  const TreeNode& root() const noexcept { return *root_; }

  void insert(const SyntaxTemplate& st, ClusterId cluster) {
    if (st.entries.empty()) return;
    TreeNode* node = root_.get();
    const std::size_t depth = std::min(st.entries.size(), depth_cap_);
    for (std::size_t i = 0; i < depth; ++i) node = &node->child(st.entries[i], node_count_);
    node->refs_.insert(cluster);
  }

  template <ClusterLookup Store>
  MatchResult search(std::span<const std::string> tokens, const Store& store) const {
    MatchResult result;
    std::vector<ClusterId> shortlisted;
    const std::size_t max_depth = std::min(tokens.size(), depth_cap_);

    std::vector<std::pair<const TreeNode*, std::size_t>> stack{{root_.get(), 0}};
    while (!stack.empty()) {
      const auto [node, depth] = stack.back();
      stack.pop_back();
      if (node != root_.get()) {
        ++result.nodes_visited;
        shortlisted.insert(shortlisted.end(), node->refs_.begin(), node->refs_.end());
      }
      if (depth == max_depth) continue;
      const std::string& token = tokens[depth];
      if (const TreeNode* exact = node->find_child(token)) stack.emplace_back(exact, depth + 1);
      for (const TreeNode* wild : node->wildcard_children_) {
        if (wild->key_ != token) stack.emplace_back(wild, depth + 1);
      }
    }

    std::sort(shortlisted.begin(), shortlisted.end());
    shortlisted.erase(std::unique(shortlisted.begin(), shortlisted.end()), shortlisted.end());
    classify_candidates(shortlisted, tokens, store, result);
    return result;
  }

  // Drops references that no live syntax variant justifies anymore and then
  // removes nodes left with neither references nor children.
  template <ClusterLookup Store>
  std::size_t prune_stale(const Store& store) {
    std::vector<std::string> path;
    std::size_t removed = 0;
    prune_node(*root_, path, store, removed);
    return removed;
  }

  template <EnumerableClusters Store>
  static PrefixTree rebuild(const Store& store, std::size_t depth_cap = kDefaultDepthCap) {
    PrefixTree tree(depth_cap);
    for (ClusterId id : store.cluster_ids()) {
      const VariantMap* variants = store.syntax_variants(id);
      if (!variants) continue;
      for (const auto& [count, list] : *variants) {
        for (const auto& st : list) tree.insert(st, id);
      }
    }
    return tree;
  }

 private:
  // Orders the loosely matching clusters by descending size, then ascending
  // id, and stops at the first one that also matches strictly.
  template <ClusterLookup Store>
  static void classify_candidates(std::span<const ClusterId> candidates, std::span<const std::string> tokens,
                                  const Store& store, MatchResult& result) {
    struct Candidate {
      ClusterId id;
      std::size_t size;
      const std::vector<SyntaxTemplate>* variants;
    };
    std::vector<Candidate> loose;
    for (ClusterId id : candidates) {
      const VariantMap* variants = store.syntax_variants(id);
      if (!variants) {
        ++result.stale_refs;
        continue;
      }
      const auto it = variants->find(tokens.size());
      if (it == variants->end()) continue;
      const bool any_loose = std::any_of(it->second.begin(), it->second.end(),
                                         [&](const SyntaxTemplate& st) { return loose_match(st, tokens); });
      if (any_loose) loose.push_back({id, store.member_count(id), &it->second});
    }
    std::sort(loose.begin(), loose.end(), [](const Candidate& a, const Candidate& b) {
      return a.size != b.size ? a.size > b.size : a.id < b.id;
    });
    for (const auto& c : loose) {
      const bool strict = std::any_of(c.variants->begin(), c.variants->end(),
                                      [&](const SyntaxTemplate& st) { return strict_match(st, tokens); });
      if (strict) {
        result.kind = MatchKind::Strict;
        result.strict_cluster = c.id;
        result.loose_candidates.clear();
        return;
      }
      result.loose_candidates.push_back(c.id);
    }
    result.kind = result.loose_candidates.empty() ? MatchKind::None : MatchKind::Loose;
  }

  template <ClusterLookup Store>
  bool justified(ClusterId id, std::span<const std::string> path, const Store& store) const {
    const VariantMap* variants = store.syntax_variants(id);
    if (!variants) return false;
    const auto matches = [&](const SyntaxTemplate& st) {
      return std::equal(path.begin(), path.end(), st.entries.begin());
    };
    if (path.size() < depth_cap_) {
      const auto it = variants->find(path.size());
      return it != variants->end() && std::any_of(it->second.begin(), it->second.end(), matches);
    }
    for (auto it = variants->lower_bound(depth_cap_); it != variants->end(); ++it) {
      if (std::any_of(it->second.begin(), it->second.end(), matches)) return true;
    }
    return false;
  }

  template <ClusterLookup Store>
  void prune_node(TreeNode& node, std::vector<std::string>& path, const Store& store, std::size_t& removed) {
    for (auto it = node.refs_.begin(); it != node.refs_.end();) {
      if (justified(*it, path, store)) {
        ++it;
      } else {
        it = node.refs_.erase(it);
        ++removed;
      }
    }
    std::vector<std::string> empty_children;
    for (auto& [key, child] : node.children_) {
      path.push_back(key);
      prune_node(*child, path, store, removed);
      path.pop_back();
      if (child->refs_.empty() && child->children_.empty()) empty_children.push_back(key);
    }
    for (const auto& key : empty_children) {
      node.erase_child(key);
      --node_count_;
    }
  }

  std::size_t depth_cap_;
  std::unique_ptr<TreeNode> root_ = std::make_unique<TreeNode>();
  std::size_t node_count_ = 0;
};

}  // namespace logmill
