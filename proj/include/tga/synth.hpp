#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "tga/session_model.hpp"

namespace tga {

// One scripted gaze segment. The gaze holds on `student` (or on `look_at`
// when no student is named) for duration_ms; the first transition_ms of the
// segment sweep linearly from the previous direction.
struct GazeSegment {
  std::optional<std::string> student;
  std::optional<Vec3> look_at;
  TimeMs duration_ms = 1000;
  TimeMs transition_ms = 0;
  double jitter_deg = 0.0;
};

struct SynthConfig {
  std::string session_id = "synth";
  std::string subject = "synthetic";
  std::vector<std::string> learning_objectives;
  ClassLevel class_level = ClassLevel::Medium;

  std::vector<BehaviorCode> codes;
  std::vector<double> initial_distribution;
  std::vector<std::vector<double>> transition;  // row-stochastic
  std::size_t n_events = 100;
  TimeMs event_spacing_ms = 1000;

  // Indexed by index_of(CognitiveLevel). Teacher events draw from their
  // code's level; student events draw from the Unclassified list.
  std::array<std::vector<std::string>, kLevelCount> utterance_templates;

  std::vector<GazeSegment> gaze_script;
  bool gaze_loop = true;  // repeat the script until the session ends
  Vec3 head_pos{0.0, 1.6, 0.0};
  SceneLayout scene;
  double sample_rate_hz = 60.0;
  std::uint64_t seed = 0;
};

// Throws InvalidStochasticMatrix when a row or the initial distribution is
// not a probability vector (tolerance 1e-9), or when shapes disagree.
void check_config(const SynthConfig& cfg);

SynthConfig synth_config_from_json(const nlohmann::json& j);
SynthConfig read_synth_config(const std::filesystem::path& path);

// Deterministic in cfg (including cfg.seed); output passes validate().
SessionLog generate_session(const SynthConfig& cfg);

// Events only: a Markov chain of `n` codes.
std::vector<std::size_t> sample_chain(const SynthConfig& cfg, std::mt19937_64& rng);

// Rotates `dir` by an isotropic tangent-plane offset. The offset is Gaussian
// with σ = bound/2 per axis, redrawn until its magnitude is within `bound`
// degrees, so the angle to `dir` never exceeds the bound.
Vec3 jitter_direction(Vec3 dir, double bound_deg, std::mt19937_64& rng);

// Samples the script at the configured rate from t = 0 up to (excluding)
// end_ms. Frame k is at round(k·1000/rate) ms.
std::vector<GazeFrame> synthesize_gaze(const SynthConfig& cfg, TimeMs end_ms, std::mt19937_64& rng);

// Direction a segment aims at from the configured head position.
Vec3 segment_direction(const SynthConfig& cfg, const GazeSegment& segment);

}  // namespace tga
