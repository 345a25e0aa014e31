#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "tga/error.hpp"
#include "tga/ingest.hpp"
#include "tga/synth.hpp"

using namespace tga;
using namespace tga::testing;

namespace {

const char* kMeta =
    R"({"kind":"meta","session_id":"a1","subject":"Math","duration_ms":5000,"learning_objectives":["fractions"],"class_level":"low"})";
const char* kScene =
    R"({"kind":"scene","students":[{"id":"s1","center":[0,1,2],"radius":0.5}],"floor_plane":{"origin":[0,0,2],"normal":[0,1,0],"extent_u":4,"extent_v":4}})";

SessionLog parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_session(in);
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a parse error");
  return ErrorCode::IoError;
}

std::vector<std::string> rules_of(const ValidationReport& report) {
  std::vector<std::string> rules;
  for (const auto& v : report.violations) rules.push_back(v.rule);
  return rules;
}

}  // namespace

TEST_CASE("out-of-order utterances are sorted on ingest") {
  const std::string text = std::string(kMeta) + "\n" + kScene + "\n" +
                           R"({"kind":"utterance","t_start_ms":900,"t_end_ms":1000,"actor":"teacher","text":"later"})" +
                           "\n" +
                           R"({"kind":"utterance","t_start_ms":100,"t_end_ms":300,"actor":{"student":"s1"},"text":"earlier"})" +
                           "\n";
  const SessionLog log = parse_text(text);
  REQUIRE(log.utterances.size() == 2);
  CHECK(log.utterances[0].text == "earlier");
  CHECK(log.utterances[0].actor.student_id == "s1");
  CHECK(log.utterances[1].text == "later");
  CHECK(log.meta.class_level == ClassLevel::Low);
  CHECK(log.meta.learning_objectives == std::vector<std::string>{"fractions"});
}

TEST_CASE("gaze directions are normalized") {
  const std::string text = std::string(kMeta) + "\n" + kScene + "\n" +
                           R"({"kind":"gaze","t_ms":0,"head_pos":[0,1.6,0],"gaze_dir":[0,0,2]})" + "\n";
  const SessionLog log = parse_text(text);
  REQUIRE(log.gaze.size() == 1);
  CHECK(log.gaze[0].gaze_dir == Vec3{0, 0, 1});
}

TEST_CASE("structural parse errors") {
  CHECK(parse_error(std::string(kScene) + "\n") == ErrorCode::MissingMeta);
  CHECK(parse_error(std::string(kMeta) + "\n") == ErrorCode::MissingScene);
  CHECK(parse_error(std::string(kMeta) + "\n" + kMeta + "\n" + kScene) == ErrorCode::DuplicateMeta);
  CHECK(parse_error(std::string(kMeta) + "\n" + kScene + "\n" + kScene) == ErrorCode::DuplicateScene);
  CHECK(parse_error(std::string(kMeta) + "\n" + kScene + "\n{not json") == ErrorCode::MalformedRecord);
  CHECK(parse_error(std::string(kMeta) + "\n" + kScene + "\n" + R"({"kind":"mystery"})") ==
        ErrorCode::MalformedRecord);
  CHECK(parse_error(std::string(kMeta) + "\n" + kScene + "\n" +
                    R"({"kind":"gaze","t_ms":0,"head_pos":[0,0,0],"gaze_dir":[0,0,0]})") ==
        ErrorCode::ZeroGazeDirection);
  CHECK(parse_error(std::string(kMeta) + "\n" + kScene + "\n" +
                    R"({"kind":"event","t_ms":-5,"actor":"teacher","code":"t_focal_understanding"})") ==
        ErrorCode::TimestampOutOfRange);
  CHECK(parse_error(std::string(kMeta) + "\n" + kScene + "\n" +
                    R"({"kind":"event","t_ms":5,"actor":"teacher","code":"q_focal_understanding"})") ==
        ErrorCode::UnknownActorPrefix);
}

TEST_CASE("parse error details carry the line number") {
  try {
    parse_text(std::string(kMeta) + "\n" + kScene + "\n{broken");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.detail().find("line 3") != std::string::npos);
  }
}

TEST_CASE("validate: consistent log has no violations") {
  SessionLog log = minimal_log();
  log.utterances.push_back({0, 500, Actor::teacher(), "What is a fraction?"});
  log.events.push_back(teacher_event(0, "t_focal_remembering"));
  log.events.push_back(student_event(1000, "s2", "s_answer_low"));
  log.gaze.push_back({0, {0, 1.6, 0}, {0, 0, 1}});
  const auto report = validate(log);
  CHECK(report.ok());
  CHECK_FALSE(report.fatal);
}

TEST_CASE("validate: event past the session end") {
  SessionLog log = minimal_log("x", 1000);
  log.events.push_back(teacher_event(1500, "t_focal_remembering"));
  const auto report = validate(log);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].rule == "timestamp_out_of_range");
  CHECK(report.violations[0].record_index == 0);
  CHECK(report.fatal);
}

TEST_CASE("validate: teacher actor with a student code") {
  SessionLog log = minimal_log();
  log.events.push_back({100, Actor::teacher(), parse_behavior_code("s_creative_high")});
  CHECK(rules_of(validate(log)) == std::vector<std::string>{"actor_code_mismatch"});
}

TEST_CASE("validate: other rules") {
  SessionLog log = minimal_log();
  log.utterances.push_back({300, 200, Actor::teacher(), "backwards"});
  log.utterances.push_back({400, 500, Actor::student("ghost"), "who"});
  log.utterances.push_back({600, 700, Actor::teacher(), "", CognitiveLevel::Applying, 0.5});
  log.utterances.push_back({800, 900, Actor::teacher(), "ok", CognitiveLevel::Applying, 1.5});
  log.gaze.push_back({0, {0, 0, 0}, {0, 0, 0.5}});
  log.scene.students.push_back(log.scene.students[0]);
  const auto rules = rules_of(validate(log));
  for (const char* rule : {"utterance_interval", "unknown_student", "empty_text_labeled", "confidence_out_of_range",
                           "gaze_not_unit", "duplicate_student_id"}) {
    CHECK_MESSAGE(std::find(rules.begin(), rules.end(), rule) != rules.end(), rule);
  }
}

TEST_CASE("serialize then parse is the identity") {
  SessionLog log = minimal_log("round-trip", 20000);
  log.utterances.push_back({0, 900, Actor::teacher(), "Why does ice float? \"quoted\" é"});
  log.utterances.push_back({1000, 1500, Actor::student("s3"), "Because", CognitiveLevel::Understanding, 0.75});
  log.events.push_back(teacher_event(0, "t_funnel_analyzing"));
  log.events.push_back(student_event(1000, "s3", "s_creative_high"));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (TimeMs t = 0; t < 2000; t += 13) log.gaze.push_back({t, {g(rng), 1.6 + g(rng), g(rng)}, normalized({g(rng), g(rng), g(rng)})});
  std::ostringstream out;
  serialize_session(log, out);
  std::istringstream in(out.str());
  CHECK(parse_session(in) == log);
}

TEST_CASE("serialize then parse is the identity on generated logs") {
  SynthConfig cfg = chain_config({"t_focal_understanding", "t_funnel_analyzing", "s_creative_high"}, {1, 0, 0},
                                 {{0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}, {0.5, 0.25, 0.25}}, 60);
  cfg.utterance_templates[index_of(CognitiveLevel::Understanding)] = {"Explain the result."};
  cfg.utterance_templates[index_of(CognitiveLevel::Unclassified)] = {"I think so."};
  cfg.gaze_script = {{"s1", std::nullopt, 700, 50, 0.5}, {std::nullopt, Vec3{0, 0, 2}, 400, 50, 0.5}};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const SessionLog log = generate_session(cfg);
    std::ostringstream out;
    serialize_session(log, out);
    std::istringstream in(out.str());
    CHECK(parse_session(in) == log);
  }
}

TEST_CASE("label sidecars") {
  SessionLog log = minimal_log();
  log.utterances.push_back({0, 100, Actor::teacher(), "Compare these"});

  const auto labels = parse_label_sidecar(
      nlohmann::json::parse(R"({"entries":[{"utterance_index":0,"level":"Analyzing","confidence":0.9}]})"));
  const SessionLog labeled = apply_sidecar_labels(log, labels);
  CHECK(labeled.utterances[0].level == CognitiveLevel::Analyzing);
  CHECK(labeled.utterances[0].confidence == 0.9);
  CHECK(log.utterances[0].level == CognitiveLevel::Unclassified);
  CHECK(apply_sidecar_labels(labeled, labels) == labeled);

  CHECK(apply_sidecar_labels(log, LabelSidecar{}) == log);

  SessionLog three = minimal_log();
  for (int i = 0; i < 3; ++i) three.utterances.push_back({i * 100, i * 100 + 50, Actor::teacher(), "x"});
  LabelSidecar out_of_range;
  out_of_range.entries.push_back({5, CognitiveLevel::Applying, 1.0});
  CHECK_THROWS_AS(apply_sidecar_labels(three, out_of_range), Error);
  try {
    apply_sidecar_labels(three, out_of_range);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfRange);
  }

  try {
    parse_label_sidecar(nlohmann::json::parse(
        R"({"entries":[{"utterance_index":0,"level":"Analyzing","confidence":0.9},{"utterance_index":0,"level":"Applying","confidence":0.5}]})"));
    FAIL("expected DuplicateIndex");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateIndex);
  }
  CHECK_THROWS_AS(parse_label_sidecar(nlohmann::json::parse(R"({"rows":[]})")), Error);
}

TEST_CASE("embedding sidecars check vector length") {
  const auto ok = parse_embedding_sidecar(
      nlohmann::json::parse(R"({"dim":2,"entries":[{"utterance_index":0,"vector":[1,2]}]})"));
  CHECK(ok.dim == 2);
  CHECK(ok.entries[0].vector == std::vector<double>{1, 2});
  try {
    parse_embedding_sidecar(nlohmann::json::parse(R"({"dim":3,"entries":[{"utterance_index":0,"vector":[1,2]}]})"));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("ingest ordering invariant holds on shuffled input") {
  SessionLog log = minimal_log("shuffle", 100000);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<TimeMs> t(0, 99999);
  for (int i = 0; i < 200; ++i) log.events.push_back(teacher_event(t(rng), "t_focal_applying"));
  for (int i = 0; i < 200; ++i) log.gaze.push_back({t(rng), {0, 1.6, 0}, {0, 0, 1}});
  std::ostringstream out;
  serialize_session(log, out);
  std::istringstream in(out.str());
  const SessionLog back = parse_session(in);
  CHECK(std::is_sorted(back.events.begin(), back.events.end(),
                       [](const auto& a, const auto& b) { return a.t_ms < b.t_ms; }));
  CHECK(std::is_sorted(back.gaze.begin(), back.gaze.end(), [](const auto& a, const auto& b) { return a.t_ms < b.t_ms; }));
  CHECK(validate(back).ok());
}
