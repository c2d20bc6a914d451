#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "convoforge/lexicon.hpp"

namespace convoforge {

using Vector = std::vector<double>;

// u.v / (|u| |v|); 0 when either norm is 0. Throws on dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> v);
// Copy scaled to unit length; the zero vector stays zero.
Vector normalized(std::span<const double> v);

// utterance_id -> embedding, every vector the same dimension.
class EmbeddingSidecar {
 public:
  // JSONL lines {"utterance_id": str, "vector": [real, ...]}.
  static EmbeddingSidecar parse(std::istream& in);
  static EmbeddingSidecar load(const std::filesystem::path& path);

  const Vector* find(std::string_view utterance_id) const;
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return vectors_.size(); }

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, Vector> vectors_;
};

struct SentimentScores {
  double positive = 0.0;
  double negative = 0.0;
  double neutral = 1.0;
};

class SentimentSidecar {
 public:
  // JSONL lines {"utterance_id", "positive", "negative", "neutral"}; each
  // triple non-negative and summing to 1 within 1e-6.
  static SentimentSidecar parse(std::istream& in);
  static SentimentSidecar load(const std::filesystem::path& path);

  const SentimentScores* find(std::string_view utterance_id) const;
  std::size_t size() const noexcept { return scores_.size(); }

 private:
  std::unordered_map<std::string, SentimentScores> scores_;
};

inline constexpr std::size_t kFallbackDimension = 64;

// Feature-hashing embedder: every token and every character trigram of each
// space-padded token lands in one of 64 buckets; the count vector is
// L2-normalized. Empty text maps to the zero vector.
Vector fallback_embed(std::string_view text);

// Counts positive and negative polarity matches p+ and p-, then
// pos = p+/(p+ + p- + 1), neg = p-/(p+ + p- + 1), neu = 1 - pos - neg.
SentimentScores fallback_sentiment(std::span<const std::string> tokens,
                                   const ScoredLexicon& polarity);

// Embedding and sentiment lookup for the featurizer. With a sidecar loaded
// the fallback is never used for that quantity; without one, the fallback
// is used only if allowed.
class VectorProvider {
 public:
  VectorProvider(const EmbeddingSidecar* embeddings, const SentimentSidecar* sentiment,
                 bool allow_fallback)
      : embeddings_(embeddings), sentiment_(sentiment), allow_fallback_(allow_fallback) {}

  // Throws ValidationError naming the utterance when no source applies.
  Vector embedding(std::string_view utterance_id, std::string_view text) const;
  SentimentScores sentiment(std::string_view utterance_id, std::span<const std::string> tokens,
                            const ScoredLexicon& polarity) const;

  bool uses_fallback_embeddings() const noexcept { return embeddings_ == nullptr; }

 private:
  const EmbeddingSidecar* embeddings_;
  const SentimentSidecar* sentiment_;
  bool allow_fallback_;
};

}  // namespace convoforge
