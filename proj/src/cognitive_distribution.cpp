#include "tga/discourse.hpp"

namespace tga {

double CognitiveDistribution::teacher_lower_order_share() const {
  const std::size_t classified =
      total(ActorKind::Teacher) - count(ActorKind::Teacher, CognitiveLevel::Unclassified);
  if (classified == 0) return 0.0;
  const std::size_t lower = count(ActorKind::Teacher, CognitiveLevel::Remembering) +
                            count(ActorKind::Teacher, CognitiveLevel::Understanding);
  return static_cast<double>(lower) / static_cast<double>(classified);
}

CognitiveDistribution cognitive_distribution(std::span<const SessionLog> logs) {
  CognitiveDistribution dist;
  for (const auto& log : logs) {
    for (const auto& u : log.utterances) {
      const auto actor = static_cast<std::size_t>(u.actor.kind);
      ++dist.counts[actor][index_of(u.level)];
      ++dist.totals[actor];
    }
  }
  return dist;
}

nlohmann::json to_json(const CognitiveDistribution& dist) {
  nlohmann::json j;
  for (ActorKind actor : {ActorKind::Teacher, ActorKind::Student}) {
    nlohmann::json per_level;
    for (CognitiveLevel level : kAllLevels) per_level[std::string(to_string(level))] = dist.count(actor, level);
    j[std::string(to_string(actor))] = {{"counts", per_level}, {"total", dist.total(actor)}};
  }
  j["total"] = dist.grand_total();
  j["teacher_lower_order_share"] = dist.teacher_lower_order_share();
  j["recall_oriented"] = dist.recall_oriented();
  return j;
}

}  // namespace tga
