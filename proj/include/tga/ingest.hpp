#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "tga/session_model.hpp"

namespace tga {

// Session files are line-delimited JSON (`*.session.jsonl`), one record per
// line, discriminated by a `kind` field: meta, scene, utterance, event, gaze.
//
// Utterance records may carry optional `level` and `confidence` fields so a
// labeled log serializes losslessly.
//
// Parsing is strict about structure (MalformedRecord, Missing*/Duplicate*,
// ZeroGazeDirection, negative timestamps) and lenient about semantics:
// records past duration_ms, unknown students and actor/code mismatches are
// left for validate().
SessionLog parse_session(std::istream& in);
SessionLog parse_session_file(const std::filesystem::path& path);

void serialize_session(const SessionLog& log, std::ostream& out);
void write_session_file(const SessionLog& log, const std::filesystem::path& path);

struct Violation {
  long record_index = -1;  // index within the record's list; -1 for session-level rules
  std::string rule;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool fatal = false;

  bool ok() const { return violations.empty(); }
};

// Every rule currently checked is fatal; the flag is kept separate so
// advisory rules can be added without changing the report shape.
bool is_fatal_rule(std::string_view rule);

ValidationReport validate(const SessionLog& log);

nlohmann::json to_json(const ValidationReport& report);

struct LabelEntry {
  std::size_t utterance_index = 0;
  CognitiveLevel level = CognitiveLevel::Unclassified;
  double confidence = 0.0;
};

struct LabelSidecar {
  std::vector<LabelEntry> entries;
};

struct EmbeddingEntry {
  std::size_t utterance_index = 0;
  std::vector<double> vector;
};

struct EmbeddingSidecar {
  std::size_t dim = 0;
  std::vector<EmbeddingEntry> entries;
};

// `*.labels.json`: {"entries":[{"utterance_index":0,"level":"Analyzing","confidence":0.9}]}
LabelSidecar parse_label_sidecar(const nlohmann::json& j);
LabelSidecar read_label_sidecar(const std::filesystem::path& path);

// `*.embeddings.json`: {"dim":3,"entries":[{"utterance_index":0,"vector":[..]}]}
// Vectors of the wrong length raise DimensionMismatch.
EmbeddingSidecar parse_embedding_sidecar(const nlohmann::json& j);
EmbeddingSidecar read_embedding_sidecar(const std::filesystem::path& path);

// Throws IndexOutOfRange or DuplicateIndex; the input log is not modified.
SessionLog apply_sidecar_labels(const SessionLog& log, const LabelSidecar& labels);

// Shared JSON shapes, also used by the synth config and the report.
nlohmann::json to_json(const Actor& actor);
Actor actor_from_json(const nlohmann::json& j);
nlohmann::json to_json(Vec3 v);
Vec3 vec3_from_json(const nlohmann::json& j);
nlohmann::json scene_to_json(const SceneLayout& scene);
SceneLayout scene_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace tga
