#include "tga/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tga/ingest.hpp"

namespace tga {

std::optional<double> ray_sphere(Vec3 origin, Vec3 dir, Vec3 center, double radius) {
  const Vec3 oc = origin - center;
  const double a = dot(dir, dir);
  const double b = dot(oc, dir);
  const double c = dot(oc, oc) - radius * radius;
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double near = (-b - root) / a;
  if (near > 0.0) return near;
  const double far = (-b + root) / a;
  if (far > 0.0) return far;
  return std::nullopt;
}

std::optional<PlanePoint> ray_floor(Vec3 origin, Vec3 dir, const FloorPlane& plane) {
  const Vec3 n = plane.normal;
  const double denom = dot(dir, n);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = dot(plane.origin - origin, n) / denom;
  if (!(t > 0.0)) return std::nullopt;
  const Vec3 rel = origin + dir * t - plane.origin;
  const PlaneAxes axes = floor_plane_axes(plane);
  const PlanePoint p{dot(rel, axes.u), dot(rel, axes.v)};
  if (std::abs(p.u) > 0.5 * plane.extent_u || std::abs(p.v) > 0.5 * plane.extent_v) return std::nullopt;
  return p;
}

GazeSample resolve_gaze(const GazeFrame& frame, const SceneLayout& scene) {
  GazeSample sample;
  sample.t_ms = frame.t_ms;
  for (const auto& student : scene.students) {
    const auto t = ray_sphere(frame.head_pos, frame.gaze_dir, student.center, student.radius);
    if (t && (!sample.hit_distance || *t < *sample.hit_distance)) {
      sample.hit_distance = t;
      sample.target = student.student_id;
    }
  }
  if (sample.hit_distance) sample.hit_point = frame.head_pos + frame.gaze_dir * *sample.hit_distance;
  sample.floor_hit = ray_floor(frame.head_pos, frame.gaze_dir, scene.floor_plane);
  return sample;
}

std::vector<GazeSample> resolve_all(std::span<const GazeFrame> frames, const SceneLayout& scene) {
  std::vector<GazeSample> samples;
  samples.reserve(frames.size());
  for (const auto& f : frames) samples.push_back(resolve_gaze(f, scene));
  return samples;
}

std::vector<double> Dwell::values() const {
  std::vector<double> out;
  out.reserve(per_student.size());
  for (const auto& [id, ms] : per_student) out.push_back(static_cast<double>(ms));
  return out;
}

TimeMs Dwell::total_on_target() const {
  TimeMs s = 0;
  for (const auto& [id, ms] : per_student) s += ms;
  return s;
}

Dwell dwell_per_target(std::span<const GazeSample> samples, std::span<const StudentAvatar> students) {
  Dwell dwell;
  for (const auto& s : students) dwell.per_student.emplace_back(s.student_id, 0);
  if (samples.size() < 2) return dwell;
  dwell.span_ms = samples.back().t_ms - samples.front().t_ms;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const TimeMs dt = samples[i + 1].t_ms - samples[i].t_ms;
    auto slot = dwell.per_student.end();
    if (samples[i].target) {
      slot = std::find_if(dwell.per_student.begin(), dwell.per_student.end(),
                          [&](const auto& entry) { return entry.first == *samples[i].target; });
    }
    if (slot == dwell.per_student.end())
      dwell.off_target_ms += dt;
    else
      slot->second += dt;
  }
  return dwell;
}

double attention_entropy(std::span<const double> dwell) {
  if (dwell.size() < 2) throw Error(ErrorCode::TooFewStudents, "entropy needs at least two students");
  const double total = std::accumulate(dwell.begin(), dwell.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double x : dwell) {
    if (x <= 0.0) continue;
    const double p = x / total;
    h -= p * std::log(p);
  }
  return std::clamp(h / std::log(static_cast<double>(dwell.size())), 0.0, 1.0);
}

double gaze_gini(std::span<const double> dwell) {
  if (dwell.size() < 2) throw Error(ErrorCode::TooFewStudents, "Gini needs at least two students");
  const double total = std::accumulate(dwell.begin(), dwell.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroTotalDwell, "total dwell is zero");
  double diffs = 0.0;
  for (double a : dwell)
    for (double b : dwell) diffs += std::abs(a - b);
  // 2n²μ = 2n·Σx
  return diffs / (2.0 * static_cast<double>(dwell.size()) * total);
}

double angular_dispersion(std::span<const GazeFrame> window) {
  if (window.empty()) return 0.0;
  Vec3 sum;
  for (const auto& f : window) sum = sum + f.gaze_dir;
  double worst = 0.0;
  for (const auto& f : window) worst = std::max(worst, angle_deg(sum, f.gaze_dir));
  return worst;
}

namespace {

std::optional<std::string> modal_target(std::span<const GazeSample> samples) {
  std::vector<std::pair<std::optional<std::string>, std::size_t>> tally;
  for (const auto& s : samples) {
    auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& e) { return e.first == s.target; });
    if (it == tally.end())
      tally.emplace_back(s.target, 1);
    else
      ++it->second;
  }
  const auto best = std::max_element(tally.begin(), tally.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
  return best == tally.end() ? std::nullopt : best->first;
}

FixationEvent make_fixation(std::span<const GazeFrame> frames, std::size_t first, std::size_t last,
                            std::span<const GazeSample> samples) {
  const auto window = frames.subspan(first, last - first + 1);
  FixationEvent f;
  f.t_start_ms = frames[first].t_ms;
  f.t_end_ms = frames[last].t_ms;
  Vec3 dir_sum;
  Vec3 head_sum;
  for (const auto& frame : window) {
    dir_sum = dir_sum + frame.gaze_dir;
    head_sum = head_sum + frame.head_pos;
  }
  f.centroid_dir = normalized(dir_sum);
  f.mean_head_pos = head_sum * (1.0 / static_cast<double>(window.size()));
  f.dispersion_deg = angular_dispersion(window);
  f.first_frame = first;
  f.frame_count = window.size();
  if (!samples.empty()) f.target = modal_target(samples.subspan(first, window.size()));
  return f;
}

}  // namespace

FixationResult idt_fixations(std::span<const GazeFrame> frames, const FixationConfig& cfg,
                             std::span<const GazeSample> samples) {
  if (!(cfg.dispersion_threshold_deg > 0.0)) throw std::invalid_argument("dispersion threshold must be > 0");
  if (!samples.empty() && samples.size() != frames.size())
    throw std::invalid_argument("samples must parallel frames");
  FixationResult result;
  const std::size_t n = frames.size();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n) {
    // smallest window starting at i that spans the minimum duration
    j = std::max(j, i);
    while (j < n && frames[j].t_ms - frames[i].t_ms < cfg.min_duration_ms) ++j;
    if (j >= n) break;
    if (angular_dispersion(frames.subspan(i, j - i + 1)) > cfg.dispersion_threshold_deg) {
      ++i;
      continue;
    }
    // The first frames may still be settling from a saccade; within the first
    // min_duration of the window they are dropped when they alone block growth.
    const TimeMs onset_limit = frames[i].t_ms + cfg.min_duration_ms;
    while (j + 1 < n) {
      if (angular_dispersion(frames.subspan(i, j - i + 2)) <= cfg.dispersion_threshold_deg) {
        ++j;
      } else if (frames[i + 1].t_ms < onset_limit &&
                 angular_dispersion(frames.subspan(i + 1, j - i + 1)) <= cfg.dispersion_threshold_deg) {
        ++i;
        ++j;
      } else {
        break;
      }
    }
    result.fixations.push_back(make_fixation(frames, i, j, samples));
    i = j + 1;
  }
  for (std::size_t k = 0; k + 1 < result.fixations.size(); ++k) {
    const auto& a = result.fixations[k];
    const auto& b = result.fixations[k + 1];
    result.saccades.push_back({a.t_end_ms, b.t_start_ms, angle_deg(a.centroid_dir, b.centroid_dir)});
  }
  return result;
}

Heatmap rasterize(std::span<const WeightedPoint> points, const FloorPlane& plane, const HeatmapConfig& cfg) {
  if (!(cfg.cell_size_m > 0.0)) throw std::invalid_argument("cell size must be > 0");
  if (!(cfg.sigma_m >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  Heatmap h;
  h.cell_size_m = cfg.cell_size_m;
  h.cols = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(plane.extent_u / cfg.cell_size_m - 1e-9)));
  h.rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(plane.extent_v / cfg.cell_size_m - 1e-9)));
  h.grid.assign(h.rows * h.cols, 0.0);
  const double cell = cfg.cell_size_m;
  const double u0 = -0.5 * static_cast<double>(h.cols) * cell;
  const double v0 = -0.5 * static_cast<double>(h.rows) * cell;
  const double u1 = -u0;
  const double v1 = -v0;

  auto cell_index = [](double x, double lo, double size, std::size_t count) {
    const auto k = static_cast<long>(std::floor((x - lo) / size));
    return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(count) - 1));
  };

  std::vector<std::pair<std::size_t, double>> splat;
  for (const auto& wp : points) {
    const PlanePoint p = wp.point;
    if (p.u < u0 || p.u > u1 || p.v < v0 || p.v > v1) continue;
    h.total_mass += wp.weight;
    const std::size_t home = cell_index(p.v, v0, cell, h.rows) * h.cols + cell_index(p.u, u0, cell, h.cols);
    if (cfg.sigma_m == 0.0) {
      h.grid[home] += wp.weight;
      continue;
    }
    const double reach = 3.0 * cfg.sigma_m;
    const std::size_t c_lo = cell_index(p.u - reach, u0, cell, h.cols);
    const std::size_t c_hi = cell_index(p.u + reach, u0, cell, h.cols);
    const std::size_t r_lo = cell_index(p.v - reach, v0, cell, h.rows);
    const std::size_t r_hi = cell_index(p.v + reach, v0, cell, h.rows);
    splat.clear();
    double total = 0.0;
    for (std::size_t r = r_lo; r <= r_hi; ++r) {
      for (std::size_t c = c_lo; c <= c_hi; ++c) {
        const double du = u0 + (static_cast<double>(c) + 0.5) * cell - p.u;
        const double dv = v0 + (static_cast<double>(r) + 0.5) * cell - p.v;
        const double d2 = du * du + dv * dv;
        if (d2 > reach * reach) continue;
        const double w = std::exp(-d2 / (2.0 * cfg.sigma_m * cfg.sigma_m));
        splat.emplace_back(r * h.cols + c, w);
        total += w;
      }
    }
    if (total <= 0.0) {
      h.grid[home] += wp.weight;
      continue;
    }
    for (const auto& [idx, w] : splat) h.grid[idx] += wp.weight * w / total;
  }
  return h;
}

Heatmap heatmap(std::span<const GazeSample> samples, const FloorPlane& plane, const HeatmapConfig& cfg) {
  std::vector<WeightedPoint> points;
  for (const auto& s : samples)
    if (s.floor_hit) points.push_back({*s.floor_hit, 1.0});
  return rasterize(points, plane, cfg);
}

Heatmap fixation_heatmap(std::span<const FixationEvent> fixations, const FloorPlane& plane,
                         const HeatmapConfig& cfg) {
  std::vector<WeightedPoint> points;
  for (const auto& f : fixations) {
    if (auto hit = ray_floor(f.mean_head_pos, f.centroid_dir, plane))
      points.push_back({*hit, static_cast<double>(f.frame_count)});
  }
  return rasterize(points, plane, cfg);
}

nlohmann::json to_json(const FixationEvent& f) {
  nlohmann::json j{{"t_start_ms", f.t_start_ms},
                   {"t_end_ms", f.t_end_ms},
                   {"centroid_dir", to_json(f.centroid_dir)},
                   {"dispersion_deg", f.dispersion_deg},
                   {"frames", f.frame_count}};
  j["target"] = f.target ? nlohmann::json(*f.target) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const SaccadeEvent& s) {
  return {{"t_start_ms", s.t_start_ms}, {"t_end_ms", s.t_end_ms}, {"amplitude_deg", s.amplitude_deg}};
}

nlohmann::json to_json(const Heatmap& h, const FloorPlane& plane) {
  nlohmann::json grid = nlohmann::json::array();
  for (std::size_t r = 0; r < h.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < h.cols; ++c) row.push_back(h.at(r, c));
    grid.push_back(std::move(row));
  }
  const PlaneAxes axes = floor_plane_axes(plane);
  return {{"rows", h.rows},
          {"cols", h.cols},
          {"cell_size_m", h.cell_size_m},
          {"total_mass", h.total_mass},
          {"grid", std::move(grid)},
          {"plane",
           {{"origin", to_json(plane.origin)},
            {"normal", to_json(plane.normal)},
            {"u_axis", to_json(axes.u)},
            {"v_axis", to_json(axes.v)},
            {"extent_u", plane.extent_u},
            {"extent_v", plane.extent_v}}}};
}

}  // namespace tga
