#include "convoforge/registry.hpp"

#include <fstream>

#include "convoforge/error.hpp"

namespace convoforge {

std::string_view to_string(FeatureLevel level) {
  return level == FeatureLevel::kUtterance ? "utterance" : "conversation";
}

std::string_view to_string(FeatureCategory category) {
  switch (category) {
    case FeatureCategory::kExpression: return "expression";
    case FeatureCategory::kContentSemantic: return "content_semantic";
    case FeatureCategory::kContentTopic: return "content_topic";
  }
  return "expression";
}

std::string topic_feature_name(std::size_t topic) { return "topic_" + std::to_string(topic); }

FeatureRegistry::FeatureRegistry(std::vector<FeatureDef> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i].name, i).second) {
      throw ValidationError("duplicate feature name '" + entries_[i].name + "' in registry");
    }
  }
}

FeatureRegistry FeatureRegistry::parse(std::istream& in) {
  std::vector<FeatureDef> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw ParseError(line_no, "expected 'name<TAB>level<TAB>category'");
    FeatureDef def;
    def.name = line.substr(0, t1);
    const std::string level = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string category = line.substr(t2 + 1);
    if (level == "utterance") {
      def.level = FeatureLevel::kUtterance;
    } else if (level == "conversation") {
      def.level = FeatureLevel::kConversation;
    } else {
      throw ParseError(line_no, "unknown level '" + level + "'");
    }
    if (category == "expression") {
      def.category = FeatureCategory::kExpression;
    } else if (category == "content_semantic") {
      def.category = FeatureCategory::kContentSemantic;
    } else if (category == "content_topic") {
      def.category = FeatureCategory::kContentTopic;
    } else {
      throw ParseError(line_no, "unknown category '" + category + "'");
    }
    entries.push_back(std::move(def));
  }
  try {
    return FeatureRegistry(std::move(entries));
  } catch (const ValidationError& e) {
    throw ParseError(line_no, e.what());
  }
}

FeatureRegistry FeatureRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open registry '" + path.string() + "'");
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void FeatureRegistry::write(std::ostream& out) const {
  for (const auto& e : entries_) {
    out << e.name << '\t' << to_string(e.level) << '\t' << to_string(e.category) << '\n';
  }
}

std::optional<std::size_t> FeatureRegistry::index_of(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> FeatureRegistry::names_where(FeatureCategory category) const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.category == category) out.push_back(e.name);
  }
  return out;
}

std::size_t FeatureRegistry::count(FeatureLevel level, FeatureCategory category) const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += (e.level == level && e.category == category) ? 1 : 0;
  return n;
}

FeatureRegistry FeatureRegistry::with_topic_count(std::size_t k) const {
  std::vector<FeatureDef> entries;
  for (const auto& e : entries_) {
    if (e.category != FeatureCategory::kContentTopic) entries.push_back(e);
  }
  for (std::size_t t = 0; t < k; ++t) {
    entries.push_back({topic_feature_name(t), FeatureLevel::kConversation, FeatureCategory::kContentTopic});
  }
  entries.push_back({std::string(kResidualTopicFeature), FeatureLevel::kConversation,
                     FeatureCategory::kContentTopic});
  return FeatureRegistry(std::move(entries));
}

}  // namespace convoforge
