#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "convoforge/lexicon.hpp"
#include "convoforge/registry.hpp"

namespace convoforge {

// Everything lexical the featurizer reads from disk. Layout under the
// resource directory:
//   registry.tsv
//   lexicons/<category>.txt          one per *_lexical_per_100 feature
//   patterns/politeness.tsv, patterns/receptiveness.tsv
//   wordlists/dale_chall_easy_words.txt, function_words.txt,
//   wordlists/polarity.tsv, certainty.tsv
struct Resources {
  FeatureRegistry registry;
  std::vector<Lexicon> category_lexicons;
  PatternSet politeness;
  PatternSet receptiveness;
  Lexicon easy_words;
  Lexicon function_words;
  Lexicon stopwords;
  ScoredLexicon polarity;
  ScoredLexicon certainty;

  static Resources load(const std::filesystem::path& dir);
};

// Directory baked in at build time; the CLI falls back to it when the config
// names none.
std::filesystem::path default_resource_dir();

// Feature-name suffix shared by all lexicon rate features.
inline constexpr std::string_view kLexicalSuffix = "_lexical_per_100";

// The hedge rate is phrase-based and has no lexicon file.
inline constexpr std::string_view kHedgeWordsCategory = "hedge_words";

}  // namespace convoforge
