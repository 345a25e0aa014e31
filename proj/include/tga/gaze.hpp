#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tga/session_model.hpp"

namespace tga {

struct PlanePoint {
  double u = 0.0;
  double v = 0.0;
};

struct GazeSample {
  TimeMs t_ms = 0;
  std::optional<std::string> target;
  std::optional<Vec3> hit_point;
  std::optional<double> hit_distance;  // ray parameter of the avatar hit
  std::optional<PlanePoint> floor_hit;
};

// Nearest positive-t ray–sphere hit over the avatars (first listed wins an
// exact tie), plus the floor-plane hit when it falls inside the extent.
GazeSample resolve_gaze(const GazeFrame& frame, const SceneLayout& scene);

std::vector<GazeSample> resolve_all(std::span<const GazeFrame> frames, const SceneLayout& scene);

// Smallest positive ray parameter where origin + t·dir meets the sphere.
std::optional<double> ray_sphere(Vec3 origin, Vec3 dir, Vec3 center, double radius);

struct Dwell {
  std::vector<std::pair<std::string, TimeMs>> per_student;  // scene order
  TimeMs off_target_ms = 0;
  TimeMs span_ms = 0;  // last sample time − first sample time

  std::vector<double> values() const;
  TimeMs total_on_target() const;
};

// Each interval between consecutive samples belongs to the earlier sample's
// target; the last sample contributes nothing. Targets not in `students`
// count as off-target.
Dwell dwell_per_target(std::span<const GazeSample> samples, std::span<const StudentAvatar> students);

// Normalized Shannon entropy of dwell shares, in [0, 1]; 0 when all dwell is
// zero. Throws TooFewStudents for fewer than two entries.
double attention_entropy(std::span<const double> dwell);

// Population Gini Σᵢⱼ|xᵢ − xⱼ| / (2n²μ). Throws TooFewStudents or
// ZeroTotalDwell.
double gaze_gini(std::span<const double> dwell);

struct FixationConfig {
  double dispersion_threshold_deg = 1.0;
  TimeMs min_duration_ms = 100;
};

struct FixationEvent {
  TimeMs t_start_ms = 0;
  TimeMs t_end_ms = 0;
  Vec3 centroid_dir;
  Vec3 mean_head_pos;
  double dispersion_deg = 0.0;
  std::optional<std::string> target;
  std::size_t first_frame = 0;
  std::size_t frame_count = 0;

  TimeMs duration_ms() const { return t_end_ms - t_start_ms; }
};

struct SaccadeEvent {
  TimeMs t_start_ms = 0;
  TimeMs t_end_ms = 0;
  double amplitude_deg = 0.0;
};

struct FixationResult {
  std::vector<FixationEvent> fixations;
  std::vector<SaccadeEvent> saccades;
};

// Largest angle (degrees) between any direction in the window and the
// window's normalized mean direction.
double angular_dispersion(std::span<const GazeFrame> window);

// Dispersion-threshold identification on gaze directions. While a window
// is still within min_duration of its start, a leading frame that alone
// stops it from growing is dropped from the fixation. `samples`, when
// non-empty, must parallel `frames` and supplies each fixation's modal
// target (ties go to the target seen first; a modal miss means no target).
FixationResult idt_fixations(std::span<const GazeFrame> frames, const FixationConfig& cfg,
                             std::span<const GazeSample> samples = {});

struct Heatmap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double cell_size_m = 0.0;
  std::vector<double> grid;  // rows × cols, row-major, row index along v
  double total_mass = 0.0;

  double at(std::size_t r, std::size_t c) const { return grid[r * cols + c]; }
};

struct HeatmapConfig {
  double cell_size_m = 0.25;
  double sigma_m = 0.0;
};

struct WeightedPoint {
  PlanePoint point;
  double weight = 1.0;
};

// Grid of ceil(extent / cell) cells per axis, centered on the plane origin.
// Each point deposits its weight either in its containing cell (sigma 0) or
// as a 3σ-truncated Gaussian renormalized over in-grid cells.
Heatmap rasterize(std::span<const WeightedPoint> points, const FloorPlane& plane, const HeatmapConfig& cfg);

// Raw-sample mode: unit mass per in-extent floor hit.
Heatmap heatmap(std::span<const GazeSample> samples, const FloorPlane& plane, const HeatmapConfig& cfg);

// Fixation mode: each fixation's centroid ray, cast from its mean head
// position, deposits mass equal to its frame count.
Heatmap fixation_heatmap(std::span<const FixationEvent> fixations, const FloorPlane& plane,
                         const HeatmapConfig& cfg);

std::optional<PlanePoint> ray_floor(Vec3 origin, Vec3 dir, const FloorPlane& plane);

nlohmann::json to_json(const FixationEvent& f);
nlohmann::json to_json(const SaccadeEvent& s);
nlohmann::json to_json(const Heatmap& h, const FloorPlane& plane);

}  // namespace tga
