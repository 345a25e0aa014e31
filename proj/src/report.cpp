#include "tga/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "tga/ingest.hpp"

namespace tga {

namespace embedded {
extern const std::string_view kDefaultRulesJson;
}

using nlohmann::json;

double round4(double x) { return std::round(x * 1e4) / 1e4; }

namespace {

json opt_number(const std::optional<double>& x) { return x ? json(round4(*x)) : json(nullptr); }

double mean_of(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

}  // namespace

double CorpusSummary::mean_turns_per_session() const {
  if (sessions.empty()) return 0.0;
  return std::round(10.0 * static_cast<double>(turns) / static_cast<double>(sessions.size())) / 10.0;
}

std::string format_count(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

std::string format_corpus_summary(std::size_t sessions, std::size_t turns) {
  const double mean =
      sessions == 0 ? 0.0 : std::round(10.0 * static_cast<double>(turns) / static_cast<double>(sessions)) / 10.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", mean);
  return format_count(sessions) + (sessions == 1 ? " session, " : " sessions, ") + format_count(turns) +
         " turns, mean " + buf + " turns/session";
}

SessionGaze analyze_session_gaze(const SessionLog& log, const AnalysisOptions& options) {
  SessionGaze out;
  out.session_id = log.meta.session_id;
  out.frames = log.gaze.size();
  out.plane = log.scene.floor_plane;
  const auto samples = resolve_all(log.gaze, log.scene);
  out.dwell = dwell_per_target(samples, log.scene.students);
  const auto values = out.dwell.values();
  if (values.size() >= 2) {
    out.entropy = attention_entropy(values);
    if (out.dwell.total_on_target() > 0) out.gini = gaze_gini(values);
  }
  out.fixations = idt_fixations(log.gaze, options.fixation, samples);
  out.heatmap = options.heatmap_mode == HeatmapMode::Samples
                    ? heatmap(samples, log.scene.floor_plane, options.heatmap)
                    : fixation_heatmap(out.fixations.fixations, log.scene.floor_plane, options.heatmap);
  return out;
}

std::optional<LsaSection> analyze_sequences(std::span<const SessionLog> logs, const AnalysisOptions& options) {
  const auto sequences = extract_sequences(logs);
  LsaSection lsa;
  lsa.lag = options.lag;
  lsa.z_threshold = options.z_threshold;
  lsa.matrix = transition_counts(sequences, options.lag);
  if (lsa.matrix.total < 2) return std::nullopt;
  lsa.cells = allison_liker_z(lsa.matrix);
  lsa.significant = significant_patterns(lsa.cells, options.z_threshold);
  lsa.breakdown = type_breakdown(lsa.significant, options.breakdown);
  lsa.z_distribution = zscore_distribution(lsa.significant);
  lsa.network = build_network(lsa.significant, options.network_z);
  return lsa;
}

std::optional<GazeSection> aggregate_gaze(std::vector<SessionGaze> sessions, HeatmapMode mode) {
  const auto first = std::find_if(sessions.begin(), sessions.end(), [](const SessionGaze& s) { return s.frames > 0; });
  if (first == sessions.end()) return std::nullopt;
  GazeSection g;
  g.heatmap_mode = mode;
  g.corpus_plane = first->plane;
  g.corpus_heatmap = first->heatmap;
  std::fill(g.corpus_heatmap.grid.begin(), g.corpus_heatmap.grid.end(), 0.0);
  g.corpus_heatmap.total_mass = 0.0;

  double fixation_ms = 0.0;
  double saccade_deg = 0.0;
  for (const auto& s : sessions) {
    for (const auto& [id, ms] : s.dwell.per_student) {
      auto it = std::find_if(g.corpus_dwell.per_student.begin(), g.corpus_dwell.per_student.end(),
                             [&](const auto& e) { return e.first == id; });
      if (it == g.corpus_dwell.per_student.end())
        g.corpus_dwell.per_student.emplace_back(id, ms);
      else
        it->second += ms;
    }
    g.corpus_dwell.off_target_ms += s.dwell.off_target_ms;
    g.corpus_dwell.span_ms += s.dwell.span_ms;
    for (const auto& f : s.fixations.fixations) fixation_ms += static_cast<double>(f.duration_ms());
    for (const auto& sc : s.fixations.saccades) saccade_deg += sc.amplitude_deg;
    g.fixation_count += s.fixations.fixations.size();
    g.saccade_count += s.fixations.saccades.size();
    if (s.frames > 0 && s.plane == g.corpus_plane && s.heatmap.rows == g.corpus_heatmap.rows &&
        s.heatmap.cols == g.corpus_heatmap.cols) {
      for (std::size_t i = 0; i < s.heatmap.grid.size(); ++i) g.corpus_heatmap.grid[i] += s.heatmap.grid[i];
      g.corpus_heatmap.total_mass += s.heatmap.total_mass;
      ++g.heatmap_sessions;
    }
  }
  g.mean_fixation_ms = mean_of(fixation_ms, g.fixation_count);
  g.mean_saccade_deg = mean_of(saccade_deg, g.saccade_count);
  const auto values = g.corpus_dwell.values();
  if (values.size() >= 2) {
    g.corpus_entropy = attention_entropy(values);
    if (g.corpus_dwell.total_on_target() > 0) g.corpus_gini = gaze_gini(values);
  }
  g.sessions = std::move(sessions);
  return g;
}

EquitySection equity_indicators(std::span<const SessionLog> logs) {
  EquitySection eq;
  auto slot = [&](const std::string& id) -> std::size_t& {
    auto it = std::find_if(eq.student_turns.begin(), eq.student_turns.end(),
                           [&](const auto& e) { return e.first == id; });
    if (it != eq.student_turns.end()) return it->second;
    eq.student_turns.emplace_back(id, 0);
    return eq.student_turns.back().second;
  };
  for (const auto& log : logs) {
    for (const auto& s : log.scene.students) slot(s.student_id);
    for (const auto& u : log.utterances) {
      const TimeMs length = u.t_end_ms - u.t_start_ms;
      if (u.actor.is_teacher()) {
        eq.teacher_talk_ms += length;
      } else {
        eq.student_talk_ms += length;
        ++slot(u.actor.student_id);
      }
    }
  }
  const TimeMs total = eq.teacher_talk_ms + eq.student_talk_ms;
  if (total > 0) eq.teacher_speaking_ratio = static_cast<double>(eq.teacher_talk_ms) / static_cast<double>(total);
  std::vector<double> turns;
  std::size_t turn_total = 0;
  for (const auto& [id, n] : eq.student_turns) {
    turns.push_back(static_cast<double>(n));
    turn_total += n;
  }
  if (turns.size() >= 2 && turn_total > 0) eq.turn_gini = gaze_gini(turns);
  return eq;
}

ReportBundle summarize(const CorpusAnalyses& analyses) {
  if (analyses.logs.empty()) throw Error(ErrorCode::NothingToReport, "no sessions");
  ReportBundle bundle;
  for (const auto& log : analyses.logs) {
    bundle.corpus.sessions.push_back(log.meta);
    bundle.corpus.turns += log.utterances.size();
    bundle.corpus.events += log.events.size();
  }
  bundle.cognitive = cognitive_distribution(analyses.logs);
  bundle.projection = analyses.projection;
  bundle.lsa = analyses.lsa;
  bundle.gaze = analyses.gaze;
  bundle.equity = equity_indicators(analyses.logs);
  return bundle;
}

namespace {

json dwell_json(const Dwell& dwell) {
  json per = json::array();
  for (const auto& [id, ms] : dwell.per_student) per.push_back({{"student", id}, {"dwell_ms", ms}});
  return {{"per_student", std::move(per)}, {"off_target_ms", dwell.off_target_ms}, {"span_ms", dwell.span_ms}};
}

json rounded(const LagResult& r) {
  json j = to_json(r);
  j["expected"] = round4(r.expected);
  j["z"] = opt_number(r.z);
  return j;
}

json heatmap_json(const Heatmap& h, const FloorPlane& plane, bool round) {
  json j = to_json(h, plane);
  if (round) {
    for (auto& row : j["grid"])
      for (auto& cell : row) cell = round4(cell.get<double>());
    j["total_mass"] = round4(h.total_mass);
  }
  return j;
}

json lsa_json(const LsaSection& lsa) {
  json significant = json::array();
  for (const auto& p : lsa.significant) significant.push_back(rounded(p));
  json dist = json::array();
  for (const auto& s : lsa.z_distribution) {
    json d = to_json(s);
    for (const char* key : {"min", "q1", "median", "q3", "max"}) d[key] = round4(d[key].get<double>());
    dist.push_back(std::move(d));
  }
  json network = to_json(lsa.network);
  json edges = json::array();
  for (const auto& e : lsa.network.edges) edges.push_back(rounded(e));
  network["edges"] = std::move(edges);
  network["stroke_px_per_z"] = kStrokePerZ;
  json breakdown = to_json(lsa.breakdown);
  for (InteractionType t : kAllInteractionTypes)
    breakdown["types"][std::string(to_string(t))]["display"] = format_breakdown_entry(lsa.breakdown, t);
  return {{"present", true},
          {"lag", lsa.lag},
          {"z_threshold", lsa.z_threshold},
          {"vocabulary_size", lsa.matrix.size()},
          {"total_transitions", lsa.matrix.total},
          {"significant_count", lsa.significant.size()},
          {"significant", std::move(significant)},
          {"breakdown", std::move(breakdown)},
          {"z_distribution", std::move(dist)},
          {"network", std::move(network)},
          {"network_edge_count", lsa.network.edges.size()}};
}

std::string_view to_string(HeatmapMode mode) { return mode == HeatmapMode::Samples ? "samples" : "fixations"; }

json gaze_json(const GazeSection& g) {
  json sessions = json::array();
  for (const auto& s : g.sessions) {
    sessions.push_back({{"session_id", s.session_id},
                        {"frames", s.frames},
                        {"dwell", dwell_json(s.dwell)},
                        {"entropy", opt_number(s.entropy)},
                        {"gini", opt_number(s.gini)},
                        {"fixation_count", s.fixations.fixations.size()},
                        {"saccade_count", s.fixations.saccades.size()}});
  }
  return {{"present", true},
          {"corpus",
           {{"dwell", dwell_json(g.corpus_dwell)},
            {"entropy", opt_number(g.corpus_entropy)},
            {"gini", opt_number(g.corpus_gini)},
            {"fixation_count", g.fixation_count},
            {"mean_fixation_ms", round4(g.mean_fixation_ms)},
            {"saccade_count", g.saccade_count},
            {"mean_saccade_deg", round4(g.mean_saccade_deg)}}},
          {"sessions", std::move(sessions)},
          {"heatmap_mode", std::string(to_string(g.heatmap_mode))},
          {"heatmap_sessions", g.heatmap_sessions},
          {"heatmap", heatmap_json(g.corpus_heatmap, g.corpus_plane, true)}};
}

json projection_json(const Projection2D& p) {
  json j = to_json(p);
  for (auto& point : j["points"]) {
    point["x"] = round4(point["x"].get<double>());
    point["y"] = round4(point["y"].get<double>());
  }
  j["kl_initial"] = round4(p.kl_initial);
  j["kl_final"] = round4(p.kl_final);
  j["present"] = true;
  return j;
}

}  // namespace

json to_json(const ReportBundle& bundle) {
  json metas = json::array();
  for (const auto& m : bundle.corpus.sessions) {
    metas.push_back({{"session_id", m.session_id},
                     {"subject", m.subject},
                     {"duration_ms", m.duration_ms},
                     {"learning_objectives", m.learning_objectives},
                     {"class_level", std::string(to_string(m.class_level))}});
  }
  json cognitive = to_json(bundle.cognitive);
  cognitive["teacher_lower_order_share"] = round4(bundle.cognitive.teacher_lower_order_share());

  json student_turns = json::array();
  for (const auto& [id, n] : bundle.equity.student_turns) student_turns.push_back({{"student", id}, {"turns", n}});

  json feedback = json::array();
  for (const auto& m : bundle.feedback) feedback.push_back({{"rule_id", m.rule_id}, {"text", m.text}});

  const json absent = {{"present", false}};
  return {{"schema_version", std::string(kReportSchemaVersion)},
          {"corpus",
           {{"sessions", bundle.corpus.sessions.size()},
            {"turns", bundle.corpus.turns},
            {"events", bundle.corpus.events},
            {"mean_turns_per_session", bundle.corpus.mean_turns_per_session()},
            {"summary_line", format_corpus_summary(bundle.corpus.sessions.size(), bundle.corpus.turns)},
            {"session_meta", std::move(metas)}}},
          {"cognitive", std::move(cognitive)},
          {"projection", bundle.projection ? projection_json(*bundle.projection) : absent},
          {"lsa", bundle.lsa ? lsa_json(*bundle.lsa) : absent},
          {"gaze", bundle.gaze ? gaze_json(*bundle.gaze) : absent},
          {"equity",
           {{"teacher_talk_ms", bundle.equity.teacher_talk_ms},
            {"student_talk_ms", bundle.equity.student_talk_ms},
            {"teacher_speaking_ratio", opt_number(bundle.equity.teacher_speaking_ratio)},
            {"student_turns", std::move(student_turns)},
            {"turn_gini", opt_number(bundle.equity.turn_gini)}}},
          {"feedback", {{"authored_by", "engine"}, {"messages", std::move(feedback)}}}};
}

json gaze_export(const GazeSection& g) {
  json sessions = json::array();
  for (const auto& s : g.sessions) {
    json fixations = json::array();
    for (const auto& f : s.fixations.fixations) fixations.push_back(to_json(f));
    json saccades = json::array();
    for (const auto& sc : s.fixations.saccades) saccades.push_back(to_json(sc));
    sessions.push_back({{"session_id", s.session_id},
                        {"frames", s.frames},
                        {"dwell", dwell_json(s.dwell)},
                        {"entropy", s.entropy ? json(*s.entropy) : json(nullptr)},
                        {"gini", s.gini ? json(*s.gini) : json(nullptr)},
                        {"fixations", std::move(fixations)},
                        {"saccades", std::move(saccades)},
                        {"heatmap", heatmap_json(s.heatmap, s.plane, false)}});
  }
  return {{"heatmap_mode", std::string(to_string(g.heatmap_mode))},
          {"corpus",
           {{"dwell", dwell_json(g.corpus_dwell)},
            {"entropy", g.corpus_entropy ? json(*g.corpus_entropy) : json(nullptr)},
            {"gini", g.corpus_gini ? json(*g.corpus_gini) : json(nullptr)},
            {"heatmap", heatmap_json(g.corpus_heatmap, g.corpus_plane, false)},
            {"heatmap_sessions", g.heatmap_sessions}}},
          {"sessions", std::move(sessions)}};
}

const std::vector<std::string>& metric_paths() {
  static const std::vector<std::string> paths = [] {
    std::vector<std::string> p = {
        "corpus.sessions",
        "corpus.turns",
        "corpus.events",
        "corpus.mean_turns_per_session",
        "cognitive.total",
        "cognitive.teacher.total",
        "cognitive.student.total",
        "cognitive.teacher_lower_order_share",
        "projection.kl_initial",
        "projection.kl_final",
        "lsa.total_transitions",
        "lsa.vocabulary_size",
        "lsa.significant_count",
        "lsa.network_edge_count",
        "lsa.breakdown.denominator",
        "gaze.corpus.entropy",
        "gaze.corpus.gini",
        "gaze.corpus.fixation_count",
        "gaze.corpus.mean_fixation_ms",
        "gaze.corpus.saccade_count",
        "gaze.corpus.mean_saccade_deg",
        "gaze.corpus.dwell.off_target_ms",
        "gaze.corpus.dwell.span_ms",
        "equity.teacher_talk_ms",
        "equity.student_talk_ms",
        "equity.teacher_speaking_ratio",
        "equity.turn_gini",
    };
    for (InteractionType t : kAllInteractionTypes) {
      const std::string base = "lsa.breakdown.types." + std::string(to_string(t));
      p.push_back(base + ".count");
      p.push_back(base + ".percent");
    }
    for (ActorKind a : {ActorKind::Teacher, ActorKind::Student})
      for (CognitiveLevel l : kAllLevels)
        p.push_back("cognitive." + std::string(to_string(a)) + ".counts." + std::string(to_string(l)));
    return p;
  }();
  return paths;
}

namespace {

Comparator comparator_from_string(const std::string& s) {
  if (s == ">") return Comparator::Greater;
  if (s == "<") return Comparator::Less;
  if (s == ">=" || s == "≥") return Comparator::GreaterEqual;
  if (s == "<=" || s == "≤") return Comparator::LessEqual;
  throw Error(ErrorCode::MalformedRules, "unknown comparator '" + s + "'");
}

void check_metric_path(const std::string& path) {
  const auto& known = metric_paths();
  if (std::find(known.begin(), known.end(), path) == known.end())
    throw Error(ErrorCode::BadMetricPath, "'" + path + "' is not a numeric report field");
}

const json* resolve(const json& root, const std::string& path) {
  const json* node = &root;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (!node->is_object()) return nullptr;
    auto it = node->find(key);
    if (it == node->end()) return nullptr;
    node = &*it;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node;
}

bool compare(double value, Comparator c, double threshold) {
  switch (c) {
    case Comparator::Greater: return value > threshold;
    case Comparator::Less: return value < threshold;
    case Comparator::GreaterEqual: return value >= threshold;
    case Comparator::LessEqual: return value <= threshold;
  }
  return false;
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace

std::vector<FeedbackRule> parse_feedback_rules(const json& j) {
  if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array())
    throw Error(ErrorCode::MalformedRules, "expected an object with a 'rules' array");
  std::vector<FeedbackRule> rules;
  for (const auto& r : j["rules"]) {
    try {
      FeedbackRule rule;
      rule.id = r.at("id").get<std::string>();
      rule.metric = r.at("metric").get<std::string>();
      rule.comparator = comparator_from_string(r.at("comparator").get<std::string>());
      rule.threshold = r.at("threshold").get<double>();
      rule.message = r.at("template").get<std::string>();
      check_metric_path(rule.metric);
      rules.push_back(std::move(rule));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRules, e.what());
    }
  }
  return rules;
}

std::vector<FeedbackRule> read_feedback_rules(const std::filesystem::path& path) {
  return parse_feedback_rules(read_json_file(path));
}

const std::vector<FeedbackRule>& default_feedback_rules() {
  static const std::vector<FeedbackRule> rules = parse_feedback_rules(json::parse(embedded::kDefaultRulesJson));
  return rules;
}

std::vector<FeedbackMessage> apply_feedback(const ReportBundle& bundle, std::span<const FeedbackRule> rules) {
  for (const auto& rule : rules) check_metric_path(rule.metric);
  const json doc = to_json(bundle);
  std::vector<FeedbackMessage> messages;

  std::string baseline = "Session summary: " + doc["corpus"]["summary_line"].get<std::string>() + ", " +
                         format_count(bundle.corpus.events) + " coded events.";
  if (bundle.lsa) baseline += " " + std::to_string(bundle.lsa->significant.size()) + " significant transitions.";
  if (!bundle.gaze) baseline += " No gaze data.";
  messages.push_back({"baseline", std::move(baseline)});

  for (const auto& rule : rules) {
    const json* node = resolve(doc, rule.metric);
    if (node == nullptr || !node->is_number()) continue;
    const double value = node->get<double>();
    if (!compare(value, rule.comparator, rule.threshold)) continue;
    std::string text = rule.message;
    replace_all(text, "{value}", node->dump());
    replace_all(text, "{threshold}", json(rule.threshold).dump());
    replace_all(text, "{metric}", rule.metric);
    messages.push_back({rule.id, std::move(text)});
  }
  return messages;
}

}  // namespace tga
