#include "convoforge/vectors.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "convoforge/error.hpp"
#include "convoforge/text.hpp"
#include "json.hpp"

namespace convoforge {

using nlohmann::json;

double norm(std::span<const double> v) {
  double sum = 0.0;
  for (const double x : v) sum += x * x;
  return std::sqrt(sum);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ValidationError("cosine: dimension mismatch " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (nu * nv);
}

Vector normalized(std::span<const double> v) {
  Vector out(v.begin(), v.end());
  const double n = norm(v);
  if (n > 0.0) {
    for (auto& x : out) x /= n;
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_jsonl(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("utterance_id") || !obj["utterance_id"].is_string()) {
      throw SchemaError(line_no, "record needs a string 'utterance_id'");
    }
    fn(obj, line_no);
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open sidecar '" + path.string() + "'");
  return in;
}

double number_field(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw SchemaError(line, std::string("field '") + key + "' must be a number");
  }
  return it->get<double>();
}

}  // namespace

EmbeddingSidecar EmbeddingSidecar::parse(std::istream& in) {
  EmbeddingSidecar sidecar;
  for_each_jsonl(in, [&](const json& obj, std::size_t line) {
    const auto it = obj.find("vector");
    if (it == obj.end() || !it->is_array() || it->empty()) {
      throw SchemaError(line, "field 'vector' must be a non-empty array");
    }
    Vector v;
    v.reserve(it->size());
    for (const auto& x : *it) {
      if (!x.is_number()) throw SchemaError(line, "vector entries must be numbers");
      const double value = x.get<double>();
      if (!std::isfinite(value)) throw SchemaError(line, "vector entries must be finite");
      v.push_back(value);
    }
    if (sidecar.dimension_ == 0) sidecar.dimension_ = v.size();
    if (v.size() != sidecar.dimension_) {
      throw SchemaError(line, "dimension mismatch: expected " + std::to_string(sidecar.dimension_) +
                                  ", got " + std::to_string(v.size()));
    }
    sidecar.vectors_[obj["utterance_id"].get<std::string>()] = std::move(v);
  });
  return sidecar;
}

EmbeddingSidecar EmbeddingSidecar::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

const Vector* EmbeddingSidecar::find(std::string_view utterance_id) const {
  const auto it = vectors_.find(std::string(utterance_id));
  return it == vectors_.end() ? nullptr : &it->second;
}

SentimentSidecar SentimentSidecar::parse(std::istream& in) {
  SentimentSidecar sidecar;
  for_each_jsonl(in, [&](const json& obj, std::size_t line) {
    SentimentScores s;
    s.positive = number_field(obj, "positive", line);
    s.negative = number_field(obj, "negative", line);
    s.neutral = number_field(obj, "neutral", line);
    if (s.positive < 0.0 || s.negative < 0.0 || s.neutral < 0.0) {
      throw SchemaError(line, "sentiment scores must be non-negative");
    }
    if (std::abs(s.positive + s.negative + s.neutral - 1.0) > 1e-6) {
      throw SchemaError(line, "sentiment scores must sum to 1");
    }
    sidecar.scores_[obj["utterance_id"].get<std::string>()] = s;
  });
  return sidecar;
}

SentimentSidecar SentimentSidecar::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

const SentimentScores* SentimentSidecar::find(std::string_view utterance_id) const {
  const auto it = scores_.find(std::string(utterance_id));
  return it == scores_.end() ? nullptr : &it->second;
}

namespace {

// FNV-1a, 64-bit, with a fixed seed folded into the offset basis.
std::uint64_t bucket_hash(std::string_view kind, std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ 0x5eed5eed5eed5eedULL;
  const auto mix = [&h](std::string_view part) {
    for (const char c : part) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  };
  mix(kind);
  mix(s);
  return h;
}

}  // namespace

Vector fallback_embed(std::string_view text) {
  Vector v(kFallbackDimension, 0.0);
  for (const auto& token : tokenize(text).tokens) {
    v[bucket_hash("w:", token) % kFallbackDimension] += 1.0;
    const std::string padded = " " + token + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      v[bucket_hash("c:", std::string_view(padded).substr(i, 3)) % kFallbackDimension] += 1.0;
    }
  }
  return normalized(v);
}

SentimentScores fallback_sentiment(std::span<const std::string> tokens,
                                   const ScoredLexicon& polarity) {
  double positive = 0.0;
  double negative = 0.0;
  for (const auto& t : tokens) {
    if (const double* score = polarity.find(t)) {
      if (*score > 0.0) positive += 1.0;
      if (*score < 0.0) negative += 1.0;
    }
  }
  SentimentScores s;
  s.positive = positive / (positive + negative + 1.0);
  s.negative = negative / (positive + negative + 1.0);
  s.neutral = 1.0 - s.positive - s.negative;
  return s;
}

Vector VectorProvider::embedding(std::string_view utterance_id, std::string_view text) const {
  if (embeddings_) {
    if (const Vector* v = embeddings_->find(utterance_id)) return *v;
    throw ValidationError("embedding sidecar has no vector for utterance '" +
                          std::string(utterance_id) + "'");
  }
  if (!allow_fallback_) {
    throw ValidationError("no embedding sidecar configured for utterance '" +
                          std::string(utterance_id) +
                          "'; pass --fallback-vectors or set data.embeddings");
  }
  return fallback_embed(text);
}

SentimentScores VectorProvider::sentiment(std::string_view utterance_id,
                                          std::span<const std::string> tokens,
                                          const ScoredLexicon& polarity) const {
  if (sentiment_) {
    if (const SentimentScores* s = sentiment_->find(utterance_id)) return *s;
    throw ValidationError("sentiment sidecar has no scores for utterance '" +
                          std::string(utterance_id) + "'");
  }
  if (!allow_fallback_) {
    throw ValidationError("no sentiment sidecar configured for utterance '" +
                          std::string(utterance_id) +
                          "'; pass --fallback-vectors or set data.sentiment");
  }
  return fallback_sentiment(tokens, polarity);
}

}  // namespace convoforge
