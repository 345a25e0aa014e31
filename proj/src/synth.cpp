#include "tga/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tga/ingest.hpp"

namespace tga {

namespace {

constexpr double kStochasticTolerance = 1e-9;
constexpr TimeMs kMsPerWord = 250;

// Independent streams per concern, so editing templates or the gaze script
// leaves the event chain unchanged for a given seed.
enum class Stream : std::uint64_t { Chain = 1, Actors = 2, Utterances = 3, Gaze = 4 };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

void check_probability_vector(const std::vector<double>& p, const std::string& what) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw Error(ErrorCode::InvalidStochasticMatrix, what + " has a negative entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance)
    throw Error(ErrorCode::InvalidStochasticMatrix, what + " sums to " + std::to_string(sum));
}

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::MalformedConfig, what); }

std::size_t word_count(const std::string& text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

}  // namespace

void check_config(const SynthConfig& cfg) {
  const std::size_t k = cfg.codes.size();
  if (k == 0) throw Error(ErrorCode::InvalidStochasticMatrix, "no codes");
  if (cfg.initial_distribution.size() != k)
    throw Error(ErrorCode::InvalidStochasticMatrix, "initial_distribution length differs from codes");
  check_probability_vector(cfg.initial_distribution, "initial_distribution");
  if (cfg.transition.size() != k) throw Error(ErrorCode::InvalidStochasticMatrix, "transition must be square");
  for (std::size_t i = 0; i < k; ++i) {
    if (cfg.transition[i].size() != k) throw Error(ErrorCode::InvalidStochasticMatrix, "transition must be square");
    check_probability_vector(cfg.transition[i], "transition row " + std::to_string(i));
  }
  if (cfg.n_events == 0) bad_config("n_events must be > 0");
  if (cfg.event_spacing_ms <= 0) bad_config("event_spacing_ms must be > 0");
  if (!(cfg.sample_rate_hz > 0.0)) bad_config("sample_rate_hz must be > 0");
  const bool needs_students = std::any_of(cfg.codes.begin(), cfg.codes.end(),
                                          [](const BehaviorCode& c) { return c.actor() == ActorKind::Student; });
  if (needs_students && cfg.scene.students.empty()) bad_config("student codes need at least one scene student");
  for (const auto& seg : cfg.gaze_script) {
    if (seg.duration_ms <= 0) bad_config("gaze segment duration_ms must be > 0");
    if (seg.transition_ms < 0 || seg.transition_ms > seg.duration_ms)
      bad_config("gaze segment transition_ms must be within [0, duration_ms]");
    if (!(seg.jitter_deg >= 0.0)) bad_config("gaze segment jitter_deg must be >= 0");
    if (seg.student && cfg.scene.find(*seg.student) == nullptr)
      bad_config("gaze segment names unknown student '" + *seg.student + "'");
  }
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  using nlohmann::json;
  SynthConfig cfg;
  try {
    if (!j.is_object()) bad_config("config must be a JSON object");
    cfg.session_id = j.value("session_id", cfg.session_id);
    cfg.subject = j.value("subject", cfg.subject);
    cfg.learning_objectives = j.value("learning_objectives", cfg.learning_objectives);
    if (j.contains("class_level")) {
      const auto cls = class_level_from_string(j.at("class_level").get<std::string>());
      if (!cls) bad_config("class_level must be low|medium|high");
      cfg.class_level = *cls;
    }
    for (const auto& c : j.at("codes")) cfg.codes.push_back(parse_behavior_code(c.get<std::string>()));
    cfg.initial_distribution = j.at("initial_distribution").get<std::vector<double>>();
    cfg.transition = j.at("transition").get<std::vector<std::vector<double>>>();
    cfg.n_events = j.at("n_events").get<std::size_t>();
    cfg.event_spacing_ms = j.value("event_spacing_ms", cfg.event_spacing_ms);
    if (j.contains("utterance_templates")) {
      for (const auto& [name, list] : j.at("utterance_templates").items()) {
        const auto level = cognitive_level_from_string(name);
        if (!level) bad_config("unknown template level '" + name + "'");
        cfg.utterance_templates[index_of(*level)] = list.get<std::vector<std::string>>();
      }
    }
    if (j.contains("gaze_script")) {
      for (const auto& s : j.at("gaze_script")) {
        GazeSegment seg;
        if (s.contains("student") && !s.at("student").is_null()) seg.student = s.at("student").get<std::string>();
        if (s.contains("look_at")) seg.look_at = vec3_from_json(s.at("look_at"));
        seg.duration_ms = s.at("duration_ms").get<TimeMs>();
        seg.transition_ms = s.value("transition_ms", TimeMs{0});
        seg.jitter_deg = s.value("jitter_deg", 0.0);
        cfg.gaze_script.push_back(seg);
      }
    }
    cfg.gaze_loop = j.value("gaze_loop", cfg.gaze_loop);
    if (j.contains("head_pos")) cfg.head_pos = vec3_from_json(j.at("head_pos"));
    cfg.scene = scene_from_json(j.at("scene"));
    cfg.sample_rate_hz = j.value("sample_rate_hz", cfg.sample_rate_hz);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    bad_config(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedConfig) throw;
    bad_config(e.what());
  }
  check_config(cfg);
  return cfg;
}

SynthConfig read_synth_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    bad_config(e.detail());
  }
  return synth_config_from_json(j);
}

std::vector<std::size_t> sample_chain(const SynthConfig& cfg, std::mt19937_64& rng) {
  std::discrete_distribution<std::size_t> initial(cfg.initial_distribution.begin(), cfg.initial_distribution.end());
  std::vector<std::discrete_distribution<std::size_t>> rows;
  rows.reserve(cfg.transition.size());
  for (const auto& row : cfg.transition) rows.emplace_back(row.begin(), row.end());
  std::vector<std::size_t> states;
  states.reserve(cfg.n_events);
  states.push_back(initial(rng));
  while (states.size() < cfg.n_events) states.push_back(rows[states.back()](rng));
  return states;
}

Vec3 jitter_direction(Vec3 dir, double bound_deg, std::mt19937_64& rng) {
  if (bound_deg <= 0.0) return dir;
  const Vec3 d = normalized(dir);
  const Vec3 ref = std::abs(d.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const Vec3 a = normalized(cross(d, ref));
  const Vec3 b = cross(d, a);
  std::normal_distribution<double> offset(0.0, 0.5 * bound_deg);
  double x = 0.0;
  double y = 0.0;
  do {
    x = offset(rng);
    y = offset(rng);
  } while (std::hypot(x, y) > bound_deg);
  const double mag = std::hypot(x, y);
  if (mag == 0.0) return d;
  const double theta = mag * std::numbers::pi / 180.0;
  const Vec3 axis = (a * x + b * y) * (1.0 / mag);
  return d * std::cos(theta) + axis * std::sin(theta);
}

Vec3 segment_direction(const SynthConfig& cfg, const GazeSegment& segment) {
  if (segment.student) {
    if (const auto* s = cfg.scene.find(*segment.student)) return normalized(s->center - cfg.head_pos);
  }
  if (segment.look_at) return normalized(*segment.look_at - cfg.head_pos);
  return {0.0, 0.0, 1.0};
}

std::vector<GazeFrame> synthesize_gaze(const SynthConfig& cfg, TimeMs end_ms, std::mt19937_64& rng) {
  std::vector<GazeFrame> frames;
  if (cfg.gaze_script.empty()) return frames;
  const std::size_t n_segments = cfg.gaze_script.size();
  std::size_t seg = 0;          // position in the unrolled script
  TimeMs seg_start = 0;
  std::optional<Vec3> previous;  // hold direction of the segment before `seg`
  for (std::size_t k = 0;; ++k) {
    const auto t = static_cast<TimeMs>(std::llround(static_cast<double>(k) * 1000.0 / cfg.sample_rate_hz));
    if (t >= end_ms) break;
    while (t >= seg_start + cfg.gaze_script[seg % n_segments].duration_ms) {
      previous = segment_direction(cfg, cfg.gaze_script[seg % n_segments]);
      seg_start += cfg.gaze_script[seg % n_segments].duration_ms;
      ++seg;
    }
    if (!cfg.gaze_loop && seg >= n_segments) break;
    const GazeSegment& segment = cfg.gaze_script[seg % n_segments];
    const Vec3 target = segment_direction(cfg, segment);
    const TimeMs into = t - seg_start;
    Vec3 dir;
    if (previous && into < segment.transition_ms) {
      const double f = static_cast<double>(into) / static_cast<double>(segment.transition_ms);
      dir = normalized(*previous * (1.0 - f) + target * f);
    } else {
      dir = jitter_direction(target, segment.jitter_deg, rng);
    }
    frames.push_back({t, cfg.head_pos, dir});
  }
  return frames;
}

SessionLog generate_session(const SynthConfig& cfg) {
  check_config(cfg);
  SessionLog log;
  log.meta.session_id = cfg.session_id;
  log.meta.subject = cfg.subject;
  log.meta.learning_objectives = cfg.learning_objectives;
  log.meta.class_level = cfg.class_level;
  log.meta.duration_ms = static_cast<TimeMs>(cfg.n_events) * cfg.event_spacing_ms;
  log.scene = cfg.scene;

  auto chain_rng = stream_rng(cfg.seed, Stream::Chain);
  auto actor_rng = stream_rng(cfg.seed, Stream::Actors);
  auto text_rng = stream_rng(cfg.seed, Stream::Utterances);
  auto gaze_rng = stream_rng(cfg.seed, Stream::Gaze);

  const auto states = sample_chain(cfg, chain_rng);
  std::uniform_int_distribution<std::size_t> pick_student(0, cfg.scene.students.empty() ? 0 : cfg.scene.students.size() - 1);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const BehaviorCode& code = cfg.codes[states[i]];
    const TimeMs t = static_cast<TimeMs>(i) * cfg.event_spacing_ms;
    Actor actor = code.actor() == ActorKind::Teacher
                      ? Actor::teacher()
                      : Actor::student(cfg.scene.students[pick_student(actor_rng)].student_id);

    const CognitiveLevel level = code.actor() == ActorKind::Teacher ? code.level() : CognitiveLevel::Unclassified;
    const auto& templates = cfg.utterance_templates[index_of(level)];
    if (!templates.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, templates.size() - 1);
      const std::string& text = templates[pick(text_rng)];
      const TimeMs length = std::min<TimeMs>(cfg.event_spacing_ms - 1,
                                             kMsPerWord * static_cast<TimeMs>(std::max<std::size_t>(1, word_count(text))));
      log.utterances.push_back({t, t + length, actor, text, CognitiveLevel::Unclassified, 0.0});
    }
    log.events.push_back({t, std::move(actor), code});
  }
  log.gaze = synthesize_gaze(cfg, log.meta.duration_ms, gaze_rng);
  return log;
}

}  // namespace tga
