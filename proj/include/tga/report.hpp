#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tga/discourse.hpp"
#include "tga/gaze.hpp"
#include "tga/sequence.hpp"
#include "tga/session_model.hpp"
#include "tga/tsne.hpp"

namespace tga {

inline constexpr std::string_view kReportSchemaVersion = "tga.report/1";

enum class HeatmapMode { Samples, Fixations };

struct AnalysisOptions {
  std::size_t lag = 1;
  double z_threshold = kDefaultZThreshold;
  double network_z = kDefaultNetworkZ;
  BreakdownOptions breakdown;
  FixationConfig fixation;
  HeatmapConfig heatmap;
  HeatmapMode heatmap_mode = HeatmapMode::Samples;
  TsneConfig tsne;
};

struct CorpusSummary {
  std::vector<SessionMeta> sessions;
  std::size_t turns = 0;
  std::size_t events = 0;

  double mean_turns_per_session() const;  // one decimal
};

struct LsaSection {
  std::size_t lag = 1;
  double z_threshold = kDefaultZThreshold;
  TransitionMatrix matrix;
  std::vector<LagResult> cells;
  std::vector<LagResult> significant;
  TypeBreakdown breakdown;
  std::vector<FiveNumberSummary> z_distribution;  // over significant patterns
  SequentialNetwork network;
};

struct SessionGaze {
  std::string session_id;
  std::size_t frames = 0;
  Dwell dwell;
  std::optional<double> entropy;
  std::optional<double> gini;
  FixationResult fixations;
  Heatmap heatmap;
  FloorPlane plane;
};

struct GazeSection {
  std::vector<SessionGaze> sessions;
  Dwell corpus_dwell;  // summed by student id, first-seen order
  std::optional<double> corpus_entropy;
  std::optional<double> corpus_gini;
  std::size_t fixation_count = 0;
  double mean_fixation_ms = 0.0;
  std::size_t saccade_count = 0;
  double mean_saccade_deg = 0.0;
  HeatmapMode heatmap_mode = HeatmapMode::Samples;
  // Sum of the session heatmaps sharing the first gaze session's floor plane.
  Heatmap corpus_heatmap;
  FloorPlane corpus_plane;
  std::size_t heatmap_sessions = 0;
};

struct EquitySection {
  TimeMs teacher_talk_ms = 0;
  TimeMs student_talk_ms = 0;
  std::optional<double> teacher_speaking_ratio;
  std::vector<std::pair<std::string, std::size_t>> student_turns;  // scene order, then first seen
  std::optional<double> turn_gini;
};

struct FeedbackMessage {
  std::string rule_id;  // "baseline" for the summary message
  std::string text;
};

struct ReportBundle {
  CorpusSummary corpus;
  CognitiveDistribution cognitive;
  std::optional<Projection2D> projection;
  std::optional<LsaSection> lsa;
  std::optional<GazeSection> gaze;
  EquitySection equity;
  std::vector<FeedbackMessage> feedback;
};

struct CorpusAnalyses {
  std::span<const SessionLog> logs;
  std::optional<Projection2D> projection;
  std::optional<LsaSection> lsa;
  std::optional<GazeSection> gaze;
};

// Per-session gaze pipeline: resolution, dwell, fixations and heatmap.
SessionGaze analyze_session_gaze(const SessionLog& log, const AnalysisOptions& options);

// Returns nullopt when the corpus has fewer than two transitions.
std::optional<LsaSection> analyze_sequences(std::span<const SessionLog> logs, const AnalysisOptions& options);

// Aggregates per-session gaze in input order; nullopt when no session has
// gaze frames.
std::optional<GazeSection> aggregate_gaze(std::vector<SessionGaze> sessions, HeatmapMode mode);

EquitySection equity_indicators(std::span<const SessionLog> logs);

// Throws NothingToReport for an empty corpus. Feedback is left empty.
ReportBundle summarize(const CorpusAnalyses& analyses);

// "33 sessions, 1,269 turns, mean 38.5 turns/session"
std::string format_corpus_summary(std::size_t sessions, std::size_t turns);
// Thousands separators: 1269 → "1,269".
std::string format_count(std::size_t n);

enum class Comparator { Greater, Less, GreaterEqual, LessEqual };

struct FeedbackRule {
  std::string id;
  std::string metric;  // dot path into the report JSON, e.g. "equity.teacher_speaking_ratio"
  Comparator comparator = Comparator::Greater;
  double threshold = 0.0;
  std::string message;  // {value}, {threshold}, {metric} placeholders
};

// Numeric paths the report schema defines (present or not in a given run).
const std::vector<std::string>& metric_paths();

// {"rules":[{"id":..,"metric":..,"comparator":">","threshold":..,"template":..}]}
// Throws MalformedRules or BadMetricPath.
std::vector<FeedbackRule> parse_feedback_rules(const nlohmann::json& j);
std::vector<FeedbackRule> read_feedback_rules(const std::filesystem::path& path);
const std::vector<FeedbackRule>& default_feedback_rules();

// Baseline summary first, then one message per satisfied rule in rule
// order. Rules on absent sections are not satisfied. Throws BadMetricPath.
std::vector<FeedbackMessage> apply_feedback(const ReportBundle& bundle, std::span<const FeedbackRule> rules);

// `report.json` contents; reals are rounded to four decimals.
nlohmann::json to_json(const ReportBundle& bundle);
// `gaze.json`: full-precision per-session gaze detail.
nlohmann::json gaze_export(const GazeSection& gaze);

double round4(double x);

// Network edge stroke width in px: linear in z.
inline constexpr double kStrokePerZ = 0.25;
inline double edge_stroke_width(double z) { return kStrokePerZ * z; }

// Self-contained HTML dashboard rendered from to_json(bundle) only.
std::string render_html(const ReportBundle& bundle);

}  // namespace tga
