#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tga/error.hpp"

namespace tga {

// Milliseconds since session start.
using TimeMs = std::int64_t;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { return a * (1.0 / norm(a)); }

// Angle between two directions in degrees; inputs need not be unit length.
double angle_deg(Vec3 a, Vec3 b);

enum class ClassLevel { Low, Medium, High };

enum class ActorKind { Teacher, Student };

struct Actor {
  ActorKind kind = ActorKind::Teacher;
  std::string student_id;  // empty for the teacher

  static Actor teacher() { return {}; }
  static Actor student(std::string id) { return {ActorKind::Student, std::move(id)}; }
  bool is_teacher() const { return kind == ActorKind::Teacher; }

  friend bool operator==(const Actor&, const Actor&) = default;
};

// The six Bloom levels in ascending cognitive order, then Unclassified.
enum class CognitiveLevel {
  Remembering,
  Understanding,
  Applying,
  Analyzing,
  Evaluating,
  Creating,
  Unclassified,
};

inline constexpr std::array<CognitiveLevel, 7> kAllLevels = {
    CognitiveLevel::Remembering, CognitiveLevel::Understanding, CognitiveLevel::Applying,
    CognitiveLevel::Analyzing,   CognitiveLevel::Evaluating,    CognitiveLevel::Creating,
    CognitiveLevel::Unclassified};

inline constexpr std::size_t kLevelCount = kAllLevels.size();

inline constexpr std::size_t index_of(CognitiveLevel level) {
  return static_cast<std::size_t>(level);
}

// Student codes carry an intensity instead of a Bloom level.
enum class Intensity { Low, High };

enum class InteractionType { TT, TS, ST, SS };

inline constexpr std::array<InteractionType, 4> kAllInteractionTypes = {
    InteractionType::TT, InteractionType::TS, InteractionType::ST, InteractionType::SS};

std::string_view to_string(ClassLevel level);
std::string_view to_string(CognitiveLevel level);
std::string_view to_string(Intensity intensity);
std::string_view to_string(InteractionType type);
std::string_view to_string(ActorKind kind);

// Case-insensitive; accepts the capitalized display names and the lowercase
// code suffix spellings ("analyzing").
std::optional<CognitiveLevel> cognitive_level_from_string(std::string_view name);
std::optional<ClassLevel> class_level_from_string(std::string_view name);

// A behavior code of the form `{t|s}_{move}_{suffix}`.
class BehaviorCode {
 public:
  static BehaviorCode teacher(std::string move, CognitiveLevel level);
  static BehaviorCode student(std::string move, Intensity intensity);

  ActorKind actor() const { return actor_; }
  const std::string& move() const { return move_; }
  // Teacher codes only; Unclassified for student codes.
  CognitiveLevel level() const { return level_; }
  // Student codes only.
  Intensity intensity() const { return intensity_; }

  // Canonical `{prefix}_{move}_{suffix}` form.
  const std::string& str() const { return canonical_; }

  friend bool operator==(const BehaviorCode& a, const BehaviorCode& b) {
    return a.canonical_ == b.canonical_;
  }
  friend auto operator<=>(const BehaviorCode& a, const BehaviorCode& b) {
    return a.canonical_ <=> b.canonical_;
  }

 private:
  BehaviorCode(ActorKind actor, std::string move, CognitiveLevel level, Intensity intensity);

  ActorKind actor_;
  std::string move_;
  CognitiveLevel level_;
  Intensity intensity_;
  std::string canonical_;
};

// Throws Error{UnknownActorPrefix | BadSuffixForActor | MalformedCode}.
BehaviorCode parse_behavior_code(std::string_view raw);
std::string format_behavior_code(const BehaviorCode& code);

InteractionType interaction_type(ActorKind prev, ActorKind next);
inline InteractionType interaction_type(const Actor& prev, const Actor& next) {
  return interaction_type(prev.kind, next.kind);
}

struct SessionMeta {
  std::string session_id;
  std::string subject;
  TimeMs duration_ms = 0;
  std::vector<std::string> learning_objectives;
  ClassLevel class_level = ClassLevel::Medium;

  friend bool operator==(const SessionMeta&, const SessionMeta&) = default;
};

struct Utterance {
  TimeMs t_start_ms = 0;
  TimeMs t_end_ms = 0;
  Actor actor;
  std::string text;
  CognitiveLevel level = CognitiveLevel::Unclassified;
  double confidence = 0.0;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct BehaviorEvent {
  TimeMs t_ms = 0;
  Actor actor;
  BehaviorCode code;

  friend bool operator==(const BehaviorEvent&, const BehaviorEvent&) = default;
};

struct GazeFrame {
  TimeMs t_ms = 0;
  Vec3 head_pos;
  Vec3 gaze_dir;

  friend bool operator==(const GazeFrame&, const GazeFrame&) = default;
};

struct StudentAvatar {
  std::string student_id;
  Vec3 center;
  double radius = 0.0;

  friend bool operator==(const StudentAvatar&, const StudentAvatar&) = default;
};

// A bounded rectangle centered on `origin`. In-plane axes are derived from
// the normal by floor_plane_axes().
struct FloorPlane {
  Vec3 origin;
  Vec3 normal{0.0, 1.0, 0.0};
  double extent_u = 0.0;
  double extent_v = 0.0;

  friend bool operator==(const FloorPlane&, const FloorPlane&) = default;
};

struct PlaneAxes {
  Vec3 u;
  Vec3 v;
};

// u is world +x projected onto the plane (world +z when the normal is close
// to x); v = u × n.
PlaneAxes floor_plane_axes(const FloorPlane& plane);

struct SceneLayout {
  std::vector<StudentAvatar> students;
  FloorPlane floor_plane;

  const StudentAvatar* find(std::string_view student_id) const;

  friend bool operator==(const SceneLayout&, const SceneLayout&) = default;
};

struct SessionLog {
  SessionMeta meta;
  std::vector<Utterance> utterances;
  std::vector<BehaviorEvent> events;
  std::vector<GazeFrame> gaze;
  SceneLayout scene;

  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

// Stable sort of every record list by start timestamp.
void sort_records(SessionLog& log);

}  // namespace tga
