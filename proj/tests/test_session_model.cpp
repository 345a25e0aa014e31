#include "doctest.h"
#include "tga/error.hpp"
#include "tga/session_model.hpp"

#include <random>

using namespace tga;

namespace {

ErrorCode code_of(std::string_view raw) {
  try {
    parse_behavior_code(raw);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a parse error for " << raw);
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("behavior codes parse into actor, move and suffix") {
  const auto t = parse_behavior_code("t_focal_understanding");
  CHECK(t.actor() == ActorKind::Teacher);
  CHECK(t.move() == "focal");
  CHECK(t.level() == CognitiveLevel::Understanding);

  const auto s = parse_behavior_code("s_creative_high");
  CHECK(s.actor() == ActorKind::Student);
  CHECK(s.move() == "creative");
  CHECK(s.intensity() == Intensity::High);
}

TEST_CASE("behavior code grammar rejections") {
  CHECK(code_of("x_focal_low") == ErrorCode::UnknownActorPrefix);
  CHECK(code_of("t_focal_high") == ErrorCode::BadSuffixForActor);
  CHECK(code_of("s_creative_analyzing") == ErrorCode::BadSuffixForActor);
  CHECK(code_of("t_focal") == ErrorCode::MalformedCode);
  CHECK(code_of("t_a_b_remembering") == ErrorCode::MalformedCode);
  CHECK(code_of("") == ErrorCode::MalformedCode);
  CHECK(code_of("t__remembering") == ErrorCode::MalformedCode);
}

TEST_CASE("formatting equals the lowercased input") {
  CHECK(format_behavior_code(parse_behavior_code("T_Funnel_Analyzing")) == "t_funnel_analyzing");
  CHECK(format_behavior_code(parse_behavior_code("s_disagreement_LOW")) == "s_disagreement_low");
}

TEST_CASE("parse after format is the identity on generated codes") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> moves = {"focal", "funnel", "divergent", "probe", "recall", "x2"};
  std::uniform_int_distribution<std::size_t> pick_move(0, moves.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_level(0, 5);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 500; ++i) {
    const BehaviorCode code = coin(rng)
                                  ? BehaviorCode::teacher(moves[pick_move(rng)], kAllLevels[pick_level(rng)])
                                  : BehaviorCode::student(moves[pick_move(rng)], coin(rng) ? Intensity::High : Intensity::Low);
    const BehaviorCode back = parse_behavior_code(format_behavior_code(code));
    CHECK(back == code);
    CHECK(format_behavior_code(back) == format_behavior_code(code));
  }
}

TEST_CASE("interaction type follows actor kinds only") {
  CHECK(interaction_type(Actor::teacher(), Actor::teacher()) == InteractionType::TT);
  CHECK(interaction_type(Actor::teacher(), Actor::student("a")) == InteractionType::TS);
  CHECK(interaction_type(Actor::student("a"), Actor::teacher()) == InteractionType::ST);
  CHECK(interaction_type(Actor::student("a"), Actor::student("b")) == InteractionType::SS);
  for (const Actor& x : {Actor::teacher(), Actor::student("c")})
    CHECK(interaction_type(Actor::student("a"), x) == interaction_type(Actor::student("b"), x));
}

TEST_CASE("level and class level names") {
  CHECK(to_string(CognitiveLevel::Analyzing) == "Analyzing");
  CHECK(cognitive_level_from_string("evaluating") == CognitiveLevel::Evaluating);
  CHECK_FALSE(cognitive_level_from_string("thinking").has_value());
  CHECK(class_level_from_string("HIGH") == ClassLevel::High);
  CHECK(to_string(InteractionType::ST) == "ST");
}

TEST_CASE("vector helpers") {
  CHECK(angle_deg({1, 0, 0}, {0, 1, 0}) == doctest::Approx(90.0));
  CHECK(angle_deg({1, 0, 0}, {1, 0, 0}) == doctest::Approx(0.0));
  CHECK(angle_deg({0, 0, 1}, {0, 0, -1}) == doctest::Approx(180.0));
  const Vec3 c = cross({1, 0, 0}, {0, 1, 0});
  CHECK(c == Vec3{0, 0, 1});
}

TEST_CASE("floor plane axes are orthonormal and in-plane") {
  for (const Vec3 n : {Vec3{0, 1, 0}, Vec3{1, 0, 0}, normalized(Vec3{0.2, 1.0, -0.3})}) {
    const FloorPlane plane{{0, 0, 0}, n, 2.0, 2.0};
    const auto axes = floor_plane_axes(plane);
    CHECK(norm(axes.u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(axes.v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dot(axes.u, n)) < 1e-12);
    CHECK(std::abs(dot(axes.v, n)) < 1e-12);
    CHECK(std::abs(dot(axes.u, axes.v)) < 1e-12);
  }
  const auto axes = floor_plane_axes({{0, 0, 0}, {0, 1, 0}, 1, 1});
  CHECK(axes.u == Vec3{1, 0, 0});
}

TEST_CASE("sort_records orders every list and keeps ties stable") {
  SessionLog log;
  log.utterances = {{50, 60, Actor::teacher(), "b"}, {10, 20, Actor::teacher(), "a"}, {50, 55, Actor::teacher(), "c"}};
  log.events = {{30, Actor::teacher(), parse_behavior_code("t_x_applying")},
                {5, Actor::teacher(), parse_behavior_code("t_y_applying")}};
  sort_records(log);
  CHECK(log.utterances[0].text == "a");
  CHECK(log.utterances[1].text == "b");
  CHECK(log.utterances[2].text == "c");
  CHECK(log.events[0].t_ms == 5);
}
