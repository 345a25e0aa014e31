#include "tga/session_model.hpp"

#include <algorithm>
#include <cctype>
#include <numbers>

namespace tga {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownActorPrefix: return "UnknownActorPrefix";
    case ErrorCode::BadSuffixForActor: return "BadSuffixForActor";
    case ErrorCode::MalformedCode: return "MalformedCode";
    case ErrorCode::MissingMeta: return "MissingMeta";
    case ErrorCode::MissingScene: return "MissingScene";
    case ErrorCode::DuplicateMeta: return "DuplicateMeta";
    case ErrorCode::DuplicateScene: return "DuplicateScene";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::ZeroGazeDirection: return "ZeroGazeDirection";
    case ErrorCode::TimestampOutOfRange: return "TimestampOutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DuplicateIndex: return "DuplicateIndex";
    case ErrorCode::MalformedSidecar: return "MalformedSidecar";
    case ErrorCode::MalformedLexicon: return "MalformedLexicon";
    case ErrorCode::PerplexityTooLarge: return "PerplexityTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::ZeroTotalDwell: return "ZeroTotalDwell";
    case ErrorCode::TooFewStudents: return "TooFewStudents";
    case ErrorCode::NothingToReport: return "NothingToReport";
    case ErrorCode::BadMetricPath: return "BadMetricPath";
    case ErrorCode::MalformedRules: return "MalformedRules";
    case ErrorCode::InvalidStochasticMatrix: return "InvalidStochasticMatrix";
    case ErrorCode::MalformedConfig: return "MalformedConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

double angle_deg(Vec3 a, Vec3 b) {
  // atan2 form stays accurate for nearly parallel vectors, where acos loses
  // most of its precision.
  const double s = norm(cross(a, b));
  const double c = dot(a, b);
  return std::atan2(s, c) * 180.0 / std::numbers::pi;
}

std::string_view to_string(ClassLevel level) {
  switch (level) {
    case ClassLevel::Low: return "low";
    case ClassLevel::Medium: return "medium";
    case ClassLevel::High: return "high";
  }
  return "medium";
}

std::string_view to_string(CognitiveLevel level) {
  switch (level) {
    case CognitiveLevel::Remembering: return "Remembering";
    case CognitiveLevel::Understanding: return "Understanding";
    case CognitiveLevel::Applying: return "Applying";
    case CognitiveLevel::Analyzing: return "Analyzing";
    case CognitiveLevel::Evaluating: return "Evaluating";
    case CognitiveLevel::Creating: return "Creating";
    case CognitiveLevel::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

std::string_view to_string(Intensity intensity) {
  return intensity == Intensity::Low ? "low" : "high";
}

std::string_view to_string(InteractionType type) {
  switch (type) {
    case InteractionType::TT: return "TT";
    case InteractionType::TS: return "TS";
    case InteractionType::ST: return "ST";
    case InteractionType::SS: return "SS";
  }
  return "TT";
}

std::string_view to_string(ActorKind kind) {
  return kind == ActorKind::Teacher ? "teacher" : "student";
}

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_move_identifier(std::string_view s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::islower(c) || std::isdigit(c);
  });
}

std::string lowercase_level(CognitiveLevel level) { return lowercase(to_string(level)); }

}  // namespace

std::optional<CognitiveLevel> cognitive_level_from_string(std::string_view name) {
  const std::string lower = lowercase(name);
  for (CognitiveLevel level : kAllLevels) {
    if (lower == lowercase_level(level)) return level;
  }
  return std::nullopt;
}

std::optional<ClassLevel> class_level_from_string(std::string_view name) {
  const std::string lower = lowercase(name);
  if (lower == "low") return ClassLevel::Low;
  if (lower == "medium") return ClassLevel::Medium;
  if (lower == "high") return ClassLevel::High;
  return std::nullopt;
}

BehaviorCode::BehaviorCode(ActorKind actor, std::string move, CognitiveLevel level,
                           Intensity intensity)
    : actor_(actor), move_(std::move(move)), level_(level), intensity_(intensity) {
  canonical_ = actor_ == ActorKind::Teacher ? "t_" : "s_";
  canonical_ += move_;
  canonical_ += '_';
  canonical_ += actor_ == ActorKind::Teacher ? lowercase_level(level_)
                                             : std::string(to_string(intensity_));
}

BehaviorCode BehaviorCode::teacher(std::string move, CognitiveLevel level) {
  if (!is_move_identifier(move)) throw Error(ErrorCode::MalformedCode, "bad move '" + move + "'");
  if (level == CognitiveLevel::Unclassified)
    throw Error(ErrorCode::BadSuffixForActor, "teacher codes need a Bloom level");
  return BehaviorCode(ActorKind::Teacher, std::move(move), level, Intensity::Low);
}

BehaviorCode BehaviorCode::student(std::string move, Intensity intensity) {
  if (!is_move_identifier(move)) throw Error(ErrorCode::MalformedCode, "bad move '" + move + "'");
  return BehaviorCode(ActorKind::Student, std::move(move), CognitiveLevel::Unclassified, intensity);
}

BehaviorCode parse_behavior_code(std::string_view raw) {
  const std::string lower = lowercase(raw);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = lower.find('_', start);
    fields.push_back(lower.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (fields.size() != 3)
    throw Error(ErrorCode::MalformedCode,
                "'" + std::string(raw) + "' has " + std::to_string(fields.size()) +
                    " fields, expected 3");
  const std::string& prefix = fields[0];
  if (prefix != "t" && prefix != "s")
    throw Error(ErrorCode::UnknownActorPrefix, "'" + std::string(raw) + "'");
  if (!is_move_identifier(fields[1]))
    throw Error(ErrorCode::MalformedCode, "bad move in '" + std::string(raw) + "'");

  const std::string& suffix = fields[2];
  if (prefix == "t") {
    const auto level = cognitive_level_from_string(suffix);
    if (!level || *level == CognitiveLevel::Unclassified)
      throw Error(ErrorCode::BadSuffixForActor, "'" + std::string(raw) + "'");
    return BehaviorCode::teacher(fields[1], *level);
  }
  if (suffix == "low") return BehaviorCode::student(fields[1], Intensity::Low);
  if (suffix == "high") return BehaviorCode::student(fields[1], Intensity::High);
  throw Error(ErrorCode::BadSuffixForActor, "'" + std::string(raw) + "'");
}

std::string format_behavior_code(const BehaviorCode& code) { return code.str(); }

InteractionType interaction_type(ActorKind prev, ActorKind next) {
  if (prev == ActorKind::Teacher)
    return next == ActorKind::Teacher ? InteractionType::TT : InteractionType::TS;
  return next == ActorKind::Teacher ? InteractionType::ST : InteractionType::SS;
}

PlaneAxes floor_plane_axes(const FloorPlane& plane) {
  const Vec3 n = normalized(plane.normal);
  Vec3 ref{1.0, 0.0, 0.0};
  if (std::abs(dot(ref, n)) > 0.9) ref = {0.0, 0.0, 1.0};
  const Vec3 u = normalized(ref - n * dot(ref, n));
  const Vec3 v = cross(u, n);
  return {u, v};
}

const StudentAvatar* SceneLayout::find(std::string_view student_id) const {
  for (const auto& s : students) {
    if (s.student_id == student_id) return &s;
  }
  return nullptr;
}

void sort_records(SessionLog& log) {
  std::stable_sort(log.utterances.begin(), log.utterances.end(),
                   [](const Utterance& a, const Utterance& b) { return a.t_start_ms < b.t_start_ms; });
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const BehaviorEvent& a, const BehaviorEvent& b) { return a.t_ms < b.t_ms; });
  std::stable_sort(log.gaze.begin(), log.gaze.end(),
                   [](const GazeFrame& a, const GazeFrame& b) { return a.t_ms < b.t_ms; });
}

}  // namespace tga
