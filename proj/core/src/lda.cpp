#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "convoforge/conversation_features.hpp"
#include "convoforge/error.hpp"
#include "convoforge/random.hpp"

namespace convoforge {

std::string light_lemma(std::string_view word) {
  std::string w(word);
  const auto ends = [&w](std::string_view s) { return w.size() > s.size() + 2 && w.ends_with(s); };
  if (ends("ies")) return w.substr(0, w.size() - 3) + "y";
  if (ends("sses")) return w.substr(0, w.size() - 2);
  if (ends("ches") || ends("shes") || ends("xes") || ends("zes")) return w.substr(0, w.size() - 2);
  if (ends("s") && !ends("ss") && !ends("us") && !ends("is")) return w.substr(0, w.size() - 1);
  return w;
}

std::vector<std::string> lda_preprocess(std::span<const std::string> tokens,
                                        const Lexicon& stopwords) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (t.size() < 3 || stopwords.matches(t)) continue;
    out.push_back(light_lemma(t));
  }
  return out;
}

std::size_t lda_topic_count(std::size_t num_chats) {
  if (num_chats == 0) return 2;
  const auto k = static_cast<std::size_t>(std::llround(std::log(static_cast<double>(num_chats))));
  return std::max<std::size_t>(2, k);
}

std::vector<Vector> fit_lda(std::span<const std::vector<std::string>> documents,
                            const LdaOptions& options) {
  const std::size_t K = options.num_topics;
  if (K == 0) throw ValidationError("LDA needs at least one topic");
  const double alpha = options.alpha > 0.0 ? options.alpha : 50.0 / static_cast<double>(K);
  const double beta = options.beta;

  std::unordered_map<std::string, std::size_t> vocab;
  std::vector<std::vector<std::size_t>> docs;
  docs.reserve(documents.size());
  // Word ids in first-appearance order keep the sampler deterministic.
  for (const auto& doc : documents) {
    std::vector<std::size_t> ids;
    ids.reserve(doc.size());
    for (const auto& w : doc) ids.push_back(vocab.try_emplace(w, vocab.size()).first->second);
    docs.push_back(std::move(ids));
  }
  const std::size_t V = vocab.size();

  std::vector<std::vector<std::size_t>> doc_topic(docs.size(), std::vector<std::size_t>(K, 0));
  std::vector<std::vector<std::size_t>> topic_word(K, std::vector<std::size_t>(V, 0));
  std::vector<std::size_t> topic_total(K, 0);
  std::vector<std::vector<std::size_t>> z(docs.size());

  Rng rng(options.seed);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    z[d].resize(docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const std::size_t k = rng.uniform_index(K);
      z[d][i] = k;
      ++doc_topic[d][k];
      ++topic_word[k][docs[d][i]];
      ++topic_total[k];
    }
  }

  std::vector<double> weights(K);
  const double v_beta = static_cast<double>(V) * beta;
  for (std::size_t it = 0; it < options.iterations && V > 0; ++it) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (std::size_t i = 0; i < docs[d].size(); ++i) {
        const std::size_t w = docs[d][i];
        const std::size_t old = z[d][i];
        --doc_topic[d][old];
        --topic_word[old][w];
        --topic_total[old];
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          total += (static_cast<double>(doc_topic[d][k]) + alpha) *
                   (static_cast<double>(topic_word[k][w]) + beta) /
                   (static_cast<double>(topic_total[k]) + v_beta);
          weights[k] = total;
        }
        const double u = rng.uniform01() * total;
        std::size_t chosen = 0;
        while (chosen + 1 < K && weights[chosen] <= u) ++chosen;
        z[d][i] = chosen;
        ++doc_topic[d][chosen];
        ++topic_word[chosen][w];
        ++topic_total[chosen];
      }
    }
  }

  std::vector<Vector> theta(docs.size(), Vector(K, 0.0));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const double denom = static_cast<double>(docs[d].size()) + static_cast<double>(K) * alpha;
    for (std::size_t k = 0; k < K; ++k) {
      theta[d][k] = (static_cast<double>(doc_topic[d][k]) + alpha) / denom;
    }
  }
  return theta;
}

double information_diversity(std::span<const Vector> topic_vectors) {
  if (topic_vectors.size() < 2) return 0.0;
  Vector mean(topic_vectors[0].size(), 0.0);
  for (const auto& v : topic_vectors) {
    for (std::size_t k = 0; k < v.size(); ++k) mean[k] += v[k];
  }
  for (auto& x : mean) x /= static_cast<double>(topic_vectors.size());
  double total = 0.0;
  for (const auto& v : topic_vectors) total += 1.0 - cosine(v, mean);
  return total / static_cast<double>(topic_vectors.size());
}

}  // namespace convoforge
