#include "convoforge/resources.hpp"

#include "convoforge/error.hpp"

namespace convoforge {

std::filesystem::path default_resource_dir() {
#ifdef CONVOFORGE_DEFAULT_RESOURCE_DIR
  return CONVOFORGE_DEFAULT_RESOURCE_DIR;
#else
  return "data";
#endif
}

Resources Resources::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ValidationError("resource directory '" + dir.string() + "' does not exist");
  }
  Resources r;
  r.registry = FeatureRegistry::load(dir / "registry.tsv");
  for (const auto& def : r.registry.entries()) {
    if (!def.name.ends_with(kLexicalSuffix)) continue;
    const std::string category = def.name.substr(0, def.name.size() - kLexicalSuffix.size());
    if (category == kHedgeWordsCategory) continue;
    r.category_lexicons.push_back(Lexicon::load(dir / "lexicons" / (category + ".txt")));
  }
  r.politeness = PatternSet::load(dir / "patterns" / "politeness.tsv");
  r.receptiveness = PatternSet::load(dir / "patterns" / "receptiveness.tsv");
  r.easy_words = Lexicon::load(dir / "wordlists" / "dale_chall_easy_words.txt");
  r.function_words = Lexicon::load(dir / "wordlists" / "function_words.txt");
  r.stopwords = Lexicon::load(dir / "lexicons" / "nltk_english_stopwords.txt");
  r.polarity = ScoredLexicon::load(dir / "wordlists" / "polarity.tsv");
  r.certainty = ScoredLexicon::load(dir / "wordlists" / "certainty.tsv");
  return r;
}

}  // namespace convoforge
