#pragma once

// Shared fixtures and independent reference computations for the tests.
// The oracles avoid the library's helpers on purpose: they enumerate or
// apply formulas directly.

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tga/session_model.hpp"
#include "tga/synth.hpp"

namespace tga::testing {

inline SceneLayout four_student_scene() {
  SceneLayout scene;
  scene.students = {{"s1", {-1.5, 1.1, 2.5}, 0.3},
                    {"s2", {-0.5, 1.1, 3.0}, 0.3},
                    {"s3", {0.5, 1.1, 3.0}, 0.3},
                    {"s4", {1.5, 1.1, 2.5}, 0.3}};
  scene.floor_plane = {{0.0, 0.0, 2.0}, {0.0, 1.0, 0.0}, 6.0, 6.0};
  return scene;
}

inline SessionLog minimal_log(std::string id = "s-test", TimeMs duration = 10000) {
  SessionLog log;
  log.meta.session_id = std::move(id);
  log.meta.subject = "Science";
  log.meta.duration_ms = duration;
  log.meta.learning_objectives = {"Explain evaporation"};
  log.scene = four_student_scene();
  return log;
}

inline BehaviorEvent teacher_event(TimeMs t, const std::string& code) {
  return {t, Actor::teacher(), parse_behavior_code(code)};
}

inline BehaviorEvent student_event(TimeMs t, const std::string& id, const std::string& code) {
  return {t, Actor::student(id), parse_behavior_code(code)};
}

// Session whose events follow `codes`, one per second; s-codes go to s1.
inline SessionLog log_from_codes(const std::vector<std::string>& codes, std::string id = "seq") {
  SessionLog log = minimal_log(std::move(id), static_cast<TimeMs>(codes.size() + 1) * 1000);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const TimeMs t = static_cast<TimeMs>(i) * 1000;
    log.events.push_back(codes[i][0] == 't' ? teacher_event(t, codes[i]) : student_event(t, "s1", codes[i]));
  }
  return log;
}

// Generator config over `codes` with the given chain, one student, no gaze.
inline SynthConfig chain_config(const std::vector<std::string>& codes, std::vector<double> initial,
                                std::vector<std::vector<double>> transition, std::size_t n_events) {
  SynthConfig cfg;
  for (const auto& c : codes) cfg.codes.push_back(parse_behavior_code(c));
  cfg.initial_distribution = std::move(initial);
  cfg.transition = std::move(transition);
  cfg.n_events = n_events;
  cfg.scene = four_student_scene();
  return cfg;
}

// Four teacher codes so every transition is TT.
inline const std::vector<std::string>& four_codes() {
  static const std::vector<std::string> codes = {"t_a_remembering", "t_b_understanding", "t_c_applying",
                                                 "t_d_analyzing"};
  return codes;
}

inline std::vector<std::vector<double>> uniform_rows(std::size_t k) {
  return std::vector<std::vector<double>>(k, std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

// ---- oracles ---------------------------------------------------------------

// Exhaustive pair enumeration over integer-coded sequences.
inline std::map<std::pair<int, int>, std::size_t> enumerate_pairs(const std::vector<std::vector<int>>& seqs,
                                                                  std::size_t lag = 1) {
  std::map<std::pair<int, int>, std::size_t> counts;
  for (const auto& s : seqs)
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j)
        if (j == i + lag) ++counts[{s[i], s[j]}];
  return counts;
}

// Adjusted residual from raw totals.
inline double hand_z(double observed, double row, double col, double n) {
  const double expected = row * col / n;
  return (observed - expected) / std::sqrt(expected * (1.0 - row / n) * (1.0 - col / n));
}

// Population Gini by explicit double sum.
inline double pairwise_gini(const std::vector<double>& x) {
  double diffs = 0.0;
  double sum = 0.0;
  for (double a : x) {
    sum += a;
    for (double b : x) diffs += std::abs(a - b);
  }
  const double n = static_cast<double>(x.size());
  return diffs / (2.0 * n * n * (sum / n));
}

// Entropy in bits divided by log2(n).
inline double entropy_bits_normalized(const std::vector<double>& x) {
  double sum = 0.0;
  for (double a : x) sum += a;
  double h = 0.0;
  for (double a : x)
    if (a > 0.0) h -= (a / sum) * std::log2(a / sum);
  return h / std::log2(static_cast<double>(x.size()));
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tga-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tga::testing
