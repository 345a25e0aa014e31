#include "tga/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace tga {

using nlohmann::json;

namespace {

constexpr double kMinGazeNorm = 0.5;
constexpr double kMaxGazeNorm = 2.0;
constexpr double kUnitTolerance = 1e-3;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedRecord, what);
}

const json& field(const json& obj, const char* name) {
  if (!obj.is_object()) malformed("expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) malformed(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_string()) malformed(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

TimeMs int_field(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_number_integer()) malformed(std::string("field '") + name + "' must be an integer");
  return v.get<TimeMs>();
}

double number_field(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_number()) malformed(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

TimeMs timestamp_field(const json& obj, const char* name) {
  const TimeMs t = int_field(obj, name);
  if (t < 0)
    throw Error(ErrorCode::TimestampOutOfRange,
                std::string("field '") + name + "' is negative (" + std::to_string(t) + ")");
  return t;
}

json level_to_json(CognitiveLevel level) { return std::string(to_string(level)); }

SessionMeta meta_from_json(const json& j) {
  SessionMeta meta;
  meta.session_id = string_field(j, "session_id");
  meta.subject = string_field(j, "subject");
  meta.duration_ms = int_field(j, "duration_ms");
  if (meta.duration_ms < 0) malformed("duration_ms must be >= 0");
  const json& objectives = field(j, "learning_objectives");
  if (!objectives.is_array()) malformed("learning_objectives must be an array");
  for (const json& o : objectives) {
    if (!o.is_string()) malformed("learning_objectives entries must be strings");
    meta.learning_objectives.push_back(o.get<std::string>());
  }
  const auto cls = class_level_from_string(string_field(j, "class_level"));
  if (!cls) malformed("class_level must be low|medium|high");
  meta.class_level = *cls;
  return meta;
}

json meta_to_json(const SessionMeta& meta) {
  return json{{"kind", "meta"},
              {"session_id", meta.session_id},
              {"subject", meta.subject},
              {"duration_ms", meta.duration_ms},
              {"learning_objectives", meta.learning_objectives},
              {"class_level", std::string(to_string(meta.class_level))}};
}

Utterance utterance_from_json(const json& j) {
  Utterance u;
  u.t_start_ms = timestamp_field(j, "t_start_ms");
  u.t_end_ms = timestamp_field(j, "t_end_ms");
  u.actor = actor_from_json(field(j, "actor"));
  u.text = string_field(j, "text");
  if (j.contains("level")) {
    const auto level = cognitive_level_from_string(string_field(j, "level"));
    if (!level) malformed("unknown cognitive level");
    u.level = *level;
  }
  if (j.contains("confidence")) u.confidence = number_field(j, "confidence");
  return u;
}

json utterance_to_json(const Utterance& u) {
  json j{{"kind", "utterance"},
         {"t_start_ms", u.t_start_ms},
         {"t_end_ms", u.t_end_ms},
         {"actor", to_json(u.actor)},
         {"text", u.text}};
  if (u.level != CognitiveLevel::Unclassified || u.confidence != 0.0) {
    j["level"] = level_to_json(u.level);
    j["confidence"] = u.confidence;
  }
  return j;
}

BehaviorEvent event_from_json(const json& j) {
  const TimeMs t = timestamp_field(j, "t_ms");
  Actor actor = actor_from_json(field(j, "actor"));
  BehaviorCode code = parse_behavior_code(string_field(j, "code"));
  return BehaviorEvent{t, std::move(actor), std::move(code)};
}

json event_to_json(const BehaviorEvent& e) {
  return json{{"kind", "event"}, {"t_ms", e.t_ms}, {"actor", to_json(e.actor)}, {"code", e.code.str()}};
}

GazeFrame gaze_from_json(const json& j) {
  GazeFrame g;
  g.t_ms = timestamp_field(j, "t_ms");
  g.head_pos = vec3_from_json(field(j, "head_pos"));
  const Vec3 dir = vec3_from_json(field(j, "gaze_dir"));
  const double n = norm(dir);
  if (!(n >= kMinGazeNorm && n <= kMaxGazeNorm)) {
    std::ostringstream msg;
    msg << "gaze_dir magnitude " << n << " outside [" << kMinGazeNorm << ", " << kMaxGazeNorm << "]";
    throw Error(ErrorCode::ZeroGazeDirection, msg.str());
  }
  // Already-unit vectors are kept bit-exact so serialize/parse round-trips.
  g.gaze_dir = std::abs(n - 1.0) <= 1e-12 ? dir : dir * (1.0 / n);
  return g;
}

json gaze_to_json(const GazeFrame& g) {
  return json{{"kind", "gaze"}, {"t_ms", g.t_ms}, {"head_pos", to_json(g.head_pos)},
              {"gaze_dir", to_json(g.gaze_dir)}};
}

}  // namespace

json to_json(const Actor& actor) {
  if (actor.is_teacher()) return "teacher";
  return json{{"student", actor.student_id}};
}

Actor actor_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "teacher") return Actor::teacher();
    malformed("actor must be \"teacher\" or {\"student\": id}");
  }
  if (j.is_object() && j.size() == 1 && j.contains("student") && j["student"].is_string())
    return Actor::student(j["student"].get<std::string>());
  malformed("actor must be \"teacher\" or {\"student\": id}");
}

json to_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
    malformed("expected a 3-vector [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json scene_to_json(const SceneLayout& scene) {
  json students = json::array();
  for (const auto& s : scene.students)
    students.push_back(json{{"id", s.student_id}, {"center", to_json(s.center)}, {"radius", s.radius}});
  const FloorPlane& fp = scene.floor_plane;
  return json{{"kind", "scene"},
              {"students", std::move(students)},
              {"floor_plane", json{{"origin", to_json(fp.origin)},
                                   {"normal", to_json(fp.normal)},
                                   {"extent_u", fp.extent_u},
                                   {"extent_v", fp.extent_v}}}};
}

SceneLayout scene_from_json(const json& j) {
  SceneLayout scene;
  const json& students = field(j, "students");
  if (!students.is_array()) malformed("students must be an array");
  for (const json& s : students) {
    scene.students.push_back(
        StudentAvatar{string_field(s, "id"), vec3_from_json(field(s, "center")), number_field(s, "radius")});
  }
  const json& fp = field(j, "floor_plane");
  scene.floor_plane.origin = vec3_from_json(field(fp, "origin"));
  const Vec3 normal = vec3_from_json(field(fp, "normal"));
  if (norm(normal) == 0.0) malformed("floor_plane.normal must be non-zero");
  scene.floor_plane.normal = std::abs(norm(normal) - 1.0) <= 1e-12 ? normal : normalized(normal);
  scene.floor_plane.extent_u = number_field(fp, "extent_u");
  scene.floor_plane.extent_v = number_field(fp, "extent_v");
  return scene;
}

SessionLog parse_session(std::istream& in) {
  SessionLog log;
  bool have_meta = false;
  bool have_scene = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        malformed(std::string("invalid JSON: ") + e.what());
      }
      const std::string kind = string_field(j, "kind");
      if (kind == "meta") {
        if (have_meta) throw Error(ErrorCode::DuplicateMeta, "second meta record");
        log.meta = meta_from_json(j);
        have_meta = true;
      } else if (kind == "scene") {
        if (have_scene) throw Error(ErrorCode::DuplicateScene, "second scene record");
        log.scene = scene_from_json(j);
        have_scene = true;
      } else if (kind == "utterance") {
        log.utterances.push_back(utterance_from_json(j));
      } else if (kind == "event") {
        log.events.push_back(event_from_json(j));
      } else if (kind == "gaze") {
        log.gaze.push_back(gaze_from_json(j));
      } else {
        malformed("unknown kind '" + kind + "'");
      }
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.detail());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, where + ": " + e.what());
    }
  }
  if (!have_meta) throw Error(ErrorCode::MissingMeta, "no meta record");
  if (!have_scene) throw Error(ErrorCode::MissingScene, "no scene record");
  sort_records(log);
  return log;
}

SessionLog parse_session_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return parse_session(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void serialize_session(const SessionLog& log, std::ostream& out) {
  out << meta_to_json(log.meta).dump() << '\n';
  out << scene_to_json(log.scene).dump() << '\n';
  for (const auto& u : log.utterances) out << utterance_to_json(u).dump() << '\n';
  for (const auto& e : log.events) out << event_to_json(e).dump() << '\n';
  for (const auto& g : log.gaze) out << gaze_to_json(g).dump() << '\n';
}

void write_session_file(const SessionLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  serialize_session(log, out);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

bool is_fatal_rule(std::string_view) { return true; }

ValidationReport validate(const SessionLog& log) {
  ValidationReport report;
  auto add = [&](long index, std::string rule, std::string detail) {
    report.violations.push_back({index, std::move(rule), std::move(detail)});
  };
  const TimeMs duration = log.meta.duration_ms;
  auto in_range = [&](TimeMs t) { return t >= 0 && t <= duration; };

  if (log.meta.session_id.empty()) add(-1, "session_id_empty", "meta.session_id is empty");
  if (duration < 0) add(-1, "duration_negative", "meta.duration_ms < 0");

  // scene
  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < log.scene.students.size(); ++i) {
    const auto& s = log.scene.students[i];
    const long idx = static_cast<long>(i);
    if (s.student_id.empty()) add(idx, "student_id_empty", "scene.students[" + std::to_string(i) + "]");
    if (!seen_ids.insert(s.student_id).second)
      add(idx, "duplicate_student_id", "student '" + s.student_id + "' listed twice");
    if (!(s.radius > 0.0)) add(idx, "nonpositive_radius", "student '" + s.student_id + "'");
  }
  const FloorPlane& fp = log.scene.floor_plane;
  if (!(fp.extent_u > 0.0) || !(fp.extent_v > 0.0))
    add(-1, "nonpositive_extent", "floor_plane extents must be > 0");
  if (std::abs(norm(fp.normal) - 1.0) > 1e-9) add(-1, "floor_normal_not_unit", "floor_plane.normal");

  auto check_actor = [&](const Actor& actor, long idx, const char* list) {
    if (!actor.is_teacher() && log.scene.find(actor.student_id) == nullptr)
      add(idx, "unknown_student",
          std::string(list) + "[" + std::to_string(idx) + "] references student '" +
              actor.student_id + "' not in scene");
  };

  for (std::size_t i = 0; i < log.utterances.size(); ++i) {
    const auto& u = log.utterances[i];
    const long idx = static_cast<long>(i);
    const std::string at = "utterance[" + std::to_string(i) + "]";
    if (!in_range(u.t_start_ms) || !in_range(u.t_end_ms))
      add(idx, "timestamp_out_of_range",
          at + " [" + std::to_string(u.t_start_ms) + ", " + std::to_string(u.t_end_ms) +
              "] outside [0, " + std::to_string(duration) + "]");
    if (u.t_start_ms > u.t_end_ms) add(idx, "utterance_interval", at + " t_start_ms > t_end_ms");
    if (u.text.empty() && u.level != CognitiveLevel::Unclassified)
      add(idx, "empty_text_labeled", at + " has empty text but a cognitive level");
    if (!(u.confidence >= 0.0 && u.confidence <= 1.0))
      add(idx, "confidence_out_of_range", at + " confidence outside [0, 1]");
    check_actor(u.actor, idx, "utterance");
    if (i > 0 && log.utterances[i - 1].t_start_ms > u.t_start_ms)
      add(idx, "unsorted_records", at + " precedes its predecessor");
  }

  for (std::size_t i = 0; i < log.events.size(); ++i) {
    const auto& e = log.events[i];
    const long idx = static_cast<long>(i);
    const std::string at = "event[" + std::to_string(i) + "]";
    if (!in_range(e.t_ms))
      add(idx, "timestamp_out_of_range",
          at + " t_ms=" + std::to_string(e.t_ms) + " outside [0, " + std::to_string(duration) + "]");
    if (e.actor.kind != e.code.actor())
      add(idx, "actor_code_mismatch",
          at + " actor is " + std::string(to_string(e.actor.kind)) + " but code is " + e.code.str());
    check_actor(e.actor, idx, "event");
    if (i > 0 && log.events[i - 1].t_ms > e.t_ms) add(idx, "unsorted_records", at + " precedes its predecessor");
  }

  for (std::size_t i = 0; i < log.gaze.size(); ++i) {
    const auto& g = log.gaze[i];
    const long idx = static_cast<long>(i);
    const std::string at = "gaze[" + std::to_string(i) + "]";
    if (!in_range(g.t_ms))
      add(idx, "timestamp_out_of_range",
          at + " t_ms=" + std::to_string(g.t_ms) + " outside [0, " + std::to_string(duration) + "]");
    if (std::abs(norm(g.gaze_dir) - 1.0) > kUnitTolerance) add(idx, "gaze_not_unit", at + " gaze_dir not unit");
    if (i > 0 && log.gaze[i - 1].t_ms > g.t_ms) add(idx, "unsorted_records", at + " precedes its predecessor");
  }

  report.fatal = std::any_of(report.violations.begin(), report.violations.end(),
                             [](const Violation& v) { return is_fatal_rule(v.rule); });
  return report;
}

json to_json(const ValidationReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations)
    violations.push_back(json{{"record_index", v.record_index}, {"rule", v.rule}, {"detail", v.detail}});
  return json{{"violations", std::move(violations)}, {"fatal", report.fatal}};
}

namespace {

[[noreturn]] void bad_sidecar(const std::string& what) { throw Error(ErrorCode::MalformedSidecar, what); }

const json& entries_of(const json& j) {
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
    bad_sidecar("expected an object with an 'entries' array");
  return j["entries"];
}

std::size_t index_field(const json& e) {
  if (!e.is_object() || !e.contains("utterance_index") || !e["utterance_index"].is_number_integer() ||
      e["utterance_index"].get<long long>() < 0)
    bad_sidecar("entry needs a non-negative integer 'utterance_index'");
  return e["utterance_index"].get<std::size_t>();
}

}  // namespace

LabelSidecar parse_label_sidecar(const json& j) {
  LabelSidecar sidecar;
  std::set<std::size_t> seen;
  for (const json& e : entries_of(j)) {
    LabelEntry entry;
    entry.utterance_index = index_field(e);
    if (!e.contains("level") || !e["level"].is_string()) bad_sidecar("entry needs a string 'level'");
    const auto level = cognitive_level_from_string(e["level"].get<std::string>());
    if (!level) bad_sidecar("unknown level '" + e["level"].get<std::string>() + "'");
    entry.level = *level;
    if (!e.contains("confidence") || !e["confidence"].is_number()) bad_sidecar("entry needs a numeric 'confidence'");
    entry.confidence = e["confidence"].get<double>();
    if (!(entry.confidence >= 0.0 && entry.confidence <= 1.0)) bad_sidecar("confidence outside [0, 1]");
    if (!seen.insert(entry.utterance_index).second)
      throw Error(ErrorCode::DuplicateIndex, "utterance_index " + std::to_string(entry.utterance_index));
    sidecar.entries.push_back(entry);
  }
  return sidecar;
}

EmbeddingSidecar parse_embedding_sidecar(const json& j) {
  EmbeddingSidecar sidecar;
  if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() <= 0)
    bad_sidecar("'dim' must be a positive integer");
  sidecar.dim = j["dim"].get<std::size_t>();
  std::set<std::size_t> seen;
  for (const json& e : entries_of(j)) {
    EmbeddingEntry entry;
    entry.utterance_index = index_field(e);
    if (!e.contains("vector") || !e["vector"].is_array()) bad_sidecar("entry needs a 'vector' array");
    for (const json& x : e["vector"]) {
      if (!x.is_number()) bad_sidecar("vector components must be numbers");
      entry.vector.push_back(x.get<double>());
    }
    if (entry.vector.size() != sidecar.dim)
      throw Error(ErrorCode::DimensionMismatch, "utterance_index " + std::to_string(entry.utterance_index) +
                                                    " has " + std::to_string(entry.vector.size()) +
                                                    " components, dim is " + std::to_string(sidecar.dim));
    if (!seen.insert(entry.utterance_index).second)
      throw Error(ErrorCode::DuplicateIndex, "utterance_index " + std::to_string(entry.utterance_index));
    sidecar.entries.push_back(std::move(entry));
  }
  return sidecar;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::IoError, path.string() + ": invalid JSON: " + e.what());
  }
}

LabelSidecar read_label_sidecar(const std::filesystem::path& path) {
  try {
    return parse_label_sidecar(read_json_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

EmbeddingSidecar read_embedding_sidecar(const std::filesystem::path& path) {
  try {
    return parse_embedding_sidecar(read_json_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

SessionLog apply_sidecar_labels(const SessionLog& log, const LabelSidecar& labels) {
  std::set<std::size_t> seen;
  for (const auto& entry : labels.entries) {
    if (entry.utterance_index >= log.utterances.size())
      throw Error(ErrorCode::IndexOutOfRange, "utterance_index " + std::to_string(entry.utterance_index) +
                                                  " but session has " +
                                                  std::to_string(log.utterances.size()) + " utterances");
    if (!seen.insert(entry.utterance_index).second)
      throw Error(ErrorCode::DuplicateIndex, "utterance_index " + std::to_string(entry.utterance_index));
  }
  SessionLog out = log;
  for (const auto& entry : labels.entries) {
    out.utterances[entry.utterance_index].level = entry.level;
    out.utterances[entry.utterance_index].confidence = entry.confidence;
  }
  return out;
}

}  // namespace tga
