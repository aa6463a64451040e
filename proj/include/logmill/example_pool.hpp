#pragma once

// In-context example store: labeled (log, template) pairs with embeddings,
// queried by cosine similarity to pick the k demonstrations for a prompt.

#include <algorithm>
#include <deque>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <string>
#include <vector>

#include "logmill/embedding.hpp"
#include "logmill/errors.hpp"

namespace logmill {

enum class ExampleOrigin { Seed, Calibration, Learned };

struct ExtractionExample {
  std::string log;
  std::string template_text;  // category-token form, e.g. "read <OID> ok"
  Embedding embedding;
  ExampleOrigin origin = ExampleOrigin::Learned;
};

struct SeedPair {
  const char* log;
  const char* template_text;
};

// One seed per variable category, in category order.
inline constexpr SeedPair kDefaultSeeds[] = {
    {"Removing session 4f1d2a9c-77b3-4c1e-9a2b-0c9d3e5f6a71 from cache", "Removing session <OID> from cache"},
    {"Connection established to 10.251.43.21:50010", "Connection established to <LOI>"},
    {"Starting job daily-report-export on scheduler", "Starting job <OBN> on scheduler"},
    {"Received event of type HEARTBEAT from agent", "Received event of type <TID> from agent"},
    {"Power saving mode set to 0", "Power saving mode set to <SID>"},
    {"Request completed in 235 ms", "Request completed in <TDA> ms"},
    {"Allocated 4096 bytes for receive buffer", "Allocated <CRS> bytes for receive buffer"},
    {"Cluster has 12 active nodes", "Cluster has <OBA> active nodes"},
    {"Server responded with status 404", "Server responded with status <STC>"},
    {"Config reload triggered with flag verbose=true", "Config reload triggered with flag <OTP>"},
};

class ExamplePool {
 public:
  static constexpr std::size_t kDefaultCap = 10000;

  explicit ExamplePool(std::size_t cap = kDefaultCap) : cap_(cap) {}

  ExamplePool(const ExamplePool& other) {
    std::shared_lock lock(other.mutex_);
    pinned_ = other.pinned_;
    learned_ = other.learned_;
    cap_ = other.cap_;
  }
  ExamplePool& operator=(const ExamplePool& other) {
    if (this == &other) return *this;
    ExamplePool copy(other);
    std::unique_lock lock(mutex_);
    pinned_ = std::move(copy.pinned_);
    learned_ = std::move(copy.learned_);
    cap_ = copy.cap_;
    return *this;
  }

  static ExamplePool with_default_seeds(Embedder& embedder, std::size_t cap = kDefaultCap) {
    ExamplePool pool(cap);
    for (const auto& seed : kDefaultSeeds) {
      pool.add({seed.log, seed.template_text, embedder.embed(seed.log), ExampleOrigin::Seed});
    }
    return pool;
  }

  // Seeds and calibration examples are pinned; learned examples are evicted
  // oldest-first once the total exceeds the cap.
  void add(ExtractionExample example) {
    std::unique_lock lock(mutex_);
    const std::size_t dim = dimension_locked();
    if (dim != 0 && example.embedding.size() != dim) {
      throw EmbeddingDimError("example embedding has dimension " + std::to_string(example.embedding.size()) +
                              ", pool uses " + std::to_string(dim));
    }
    if (example.origin == ExampleOrigin::Learned) {
      learned_.push_back(std::move(example));
      while (!learned_.empty() && pinned_.size() + learned_.size() > cap_) learned_.pop_front();
    } else {
      pinned_.push_back(std::move(example));
    }
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return pinned_.size() + learned_.size();
  }

  std::size_t seed_count() const {
    std::shared_lock lock(mutex_);
    return static_cast<std::size_t>(std::count_if(pinned_.begin(), pinned_.end(), [](const auto& e) {
      return e.origin == ExampleOrigin::Seed;
    }));
  }

  std::size_t cap() const noexcept { return cap_; }

  // Snapshot in insertion order (pinned first).
  std::vector<ExtractionExample> examples() const {
    std::shared_lock lock(mutex_);
    std::vector<ExtractionExample> out(pinned_.begin(), pinned_.end());
    out.insert(out.end(), learned_.begin(), learned_.end());
    return out;
  }

  // The k entries most cosine-similar to `query`; ties keep insertion order.
  std::vector<ExtractionExample> select(const Embedding& query, std::size_t k) const {
    std::shared_lock lock(mutex_);
    std::vector<const ExtractionExample*> all;
    all.reserve(pinned_.size() + learned_.size());
    for (const auto& e : pinned_) all.push_back(&e);
    for (const auto& e : learned_) all.push_back(&e);
    if (!all.empty() && query.size() != all.front()->embedding.size()) {
      throw EmbeddingDimError("query embedding has dimension " + std::to_string(query.size()) + ", pool uses " +
                              std::to_string(all.front()->embedding.size()));
    }
    std::vector<double> score(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) score[i] = cosine_similarity(query, all[i]->embedding);
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) { return score[a] != score[b] ? score[a] > score[b] : a < b; });
    std::vector<ExtractionExample> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(*all[order[i]]);
    return out;
  }

 private:
  std::size_t dimension_locked() const {
    if (!pinned_.empty()) return pinned_.front().embedding.size();
    if (!learned_.empty()) return learned_.front().embedding.size();
    return 0;
  }

  mutable std::shared_mutex mutex_;
  std::vector<ExtractionExample> pinned_;
  std::deque<ExtractionExample> learned_;
  std::size_t cap_ = kDefaultCap;
};

inline std::vector<ExtractionExample> select_examples(const Embedding& query, const ExamplePool& pool, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  return pool.select(query, k);
}

}  // namespace logmill
