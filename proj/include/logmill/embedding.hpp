#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logmill/errors.hpp"

namespace logmill {

using Embedding = std::vector<float>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Embedding embed(std::string_view text) = 0;
  virtual std::size_t dimension() const = 0;
};

inline double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw EmbeddingDimError("embedding dimensions differ: " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

inline double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  const double ab = dot(a, b);
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return ab / (na * nb);
}

inline void normalize_in_place(Embedding& v) {
  double n = 0.0;
  for (float x : v) n += static_cast<double>(x) * x;
  n = std::sqrt(n);
  if (n == 0.0) return;
  for (float& x : v) x = static_cast<float>(x / n);
}

// Deterministic offline embedder: signed feature hashing of character
// trigrams (with boundary padding) followed by L2 normalization.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = 256, std::size_t ngram = 3)
      : dim_(dimension == 0 ? 1 : dimension), n_(ngram == 0 ? 1 : ngram) {}

  Embedding embed(std::string_view text) override {
    Embedding v(dim_, 0.0f);
    std::string padded;
    padded.reserve(text.size() + 2);
    padded += '\x02';
    padded += text;
    padded += '\x03';
    if (padded.size() < n_) padded.resize(n_, '\x03');
    for (std::size_t i = 0; i + n_ <= padded.size(); ++i) {
      const std::uint64_t h = fnv1a(std::string_view(padded).substr(i, n_));
      const std::size_t slot = static_cast<std::size_t>(h % dim_);
      v[slot] += (h >> 63) ? -1.0f : 1.0f;
    }
    normalize_in_place(v);
    return v;
  }

  std::size_t dimension() const override { return dim_; }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

  std::size_t dim_;
  std::size_t n_;
};

}  // namespace logmill
