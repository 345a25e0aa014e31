#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tga/session_model.hpp"

namespace tga {

struct LexiconRule {
  std::string pattern;  // lowercase phrase
  CognitiveLevel level = CognitiveLevel::Unclassified;
};

// Ordered phrase → level rules; the first rule whose phrase occurs in the
// text (case-insensitive, on word boundaries) decides the level.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<LexiconRule> rules);

  // {"rules":[{"pattern":"design","level":"Creating"}, ...]}
  static Lexicon from_json(const nlohmann::json& j);
  static Lexicon from_file(const std::filesystem::path& path);
  // The lexicon compiled in from data/bloom_lexicon.json.
  static const Lexicon& shipped();

  const std::vector<LexiconRule>& rules() const { return rules_; }
  CognitiveLevel default_level() const { return CognitiveLevel::Unclassified; }

 private:
  std::vector<LexiconRule> rules_;
};

struct Classification {
  CognitiveLevel level = CognitiveLevel::Unclassified;
  double confidence = 0.0;

  friend bool operator==(const Classification&, const Classification&) = default;
};

Classification classify_utterance(std::string_view text, const Lexicon& lexicon);

// Labels every utterance that has no label yet (Unclassified with confidence
// 0); sidecar or file-provided labels are kept.
void label_unlabeled(SessionLog& log, const Lexicon& lexicon);

struct CognitiveDistribution {
  // Indexed by ActorKind, then by index_of(CognitiveLevel).
  std::array<std::array<std::size_t, kLevelCount>, 2> counts{};
  std::array<std::size_t, 2> totals{};

  std::size_t count(ActorKind actor, CognitiveLevel level) const {
    return counts[static_cast<std::size_t>(actor)][index_of(level)];
  }
  std::size_t total(ActorKind actor) const { return totals[static_cast<std::size_t>(actor)]; }
  std::size_t grand_total() const { return totals[0] + totals[1]; }

  // (Remembering + Understanding) / classified teacher utterances; 0 when
  // the teacher has no classified utterance.
  double teacher_lower_order_share() const;
  // Lower-order share strictly above one half.
  bool recall_oriented() const { return teacher_lower_order_share() > 0.5; }
};

CognitiveDistribution cognitive_distribution(std::span<const SessionLog> logs);

nlohmann::json to_json(const CognitiveDistribution& dist);

}  // namespace tga
