#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace convoforge {

enum class FeatureLevel { kUtterance, kConversation };
enum class FeatureCategory { kExpression, kContentSemantic, kContentTopic };

std::string_view to_string(FeatureLevel level);
std::string_view to_string(FeatureCategory category);

struct FeatureDef {
  std::string name;
  FeatureLevel level = FeatureLevel::kUtterance;
  FeatureCategory category = FeatureCategory::kExpression;
};

// Catalogue of every feature column, in output order. Topic dummies are
// conversation-level content_topic entries named topic_<i> plus
// topic_residual.
class FeatureRegistry {
 public:
  FeatureRegistry() = default;
  explicit FeatureRegistry(std::vector<FeatureDef> entries);

  // Lines "feature_name<TAB>utterance|conversation<TAB>category".
  static FeatureRegistry parse(std::istream& in);
  static FeatureRegistry load(const std::filesystem::path& path);
  void write(std::ostream& out) const;

  const std::vector<FeatureDef>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name).has_value(); }

  std::vector<std::string> names_where(FeatureCategory category) const;
  std::size_t count(FeatureLevel level, FeatureCategory category) const;

  // Same registry with the topic block replaced by k topics + residual.
  FeatureRegistry with_topic_count(std::size_t k) const;

 private:
  std::vector<FeatureDef> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string topic_feature_name(std::size_t topic);
inline constexpr std::string_view kResidualTopicFeature = "topic_residual";

}  // namespace convoforge
