// Static HTML dashboard. Everything is rendered from the report JSON so the
// page never shows a figure that report.json lacks; chart geometry is the
// only computed output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "tga/report.hpp"

namespace tga {

using nlohmann::json;

namespace {

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

// Displayed numbers use the JSON spelling of the value.
std::string num(const json& j) {
  if (j.is_null()) return "n/a";
  if (j.is_string()) return escape(j.get<std::string>());
  return j.dump();
}

// Chart coordinates.
std::string px(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

const char* level_color(const std::string& level) {
  if (level == "Remembering") return "#4e79a7";
  if (level == "Understanding") return "#59a14f";
  if (level == "Applying") return "#edc948";
  if (level == "Analyzing") return "#f28e2b";
  if (level == "Evaluating") return "#e15759";
  if (level == "Creating") return "#b07aa1";
  return "#9d9d9d";
}

const char* itype_color(const std::string& itype) {
  if (itype == "TT") return "#d62728";
  if (itype == "TS") return "#9467bd";
  if (itype == "ST") return "#ff7f0e";
  return "#1f77b4";
}

const char* actor_color(const std::string& actor) { return actor == "teacher" ? "#d62728" : "#1f77b4"; }

constexpr const char* kStyle = R"CSS(
body{font-family:Helvetica,Arial,sans-serif;margin:24px;color:#222;background:#fafafa}
h1{font-size:22px;margin:0 0 8px}
h2{font-size:17px;margin:0 0 10px;border-bottom:1px solid #ddd;padding-bottom:4px}
section,header{background:#fff;border:1px solid #e2e2e2;border-radius:6px;padding:14px 18px;margin-bottom:16px}
table{border-collapse:collapse;font-size:13px}
td,th{border:1px solid #ddd;padding:3px 8px;text-align:left}
th{background:#f2f2f2}
.muted{color:#777;font-size:12px}
.feedback li{margin-bottom:6px}
.legend span{display:inline-block;margin-right:12px;font-size:12px}
.swatch{display:inline-block;width:10px;height:10px;margin-right:4px;vertical-align:middle}
svg text{font-size:10px;font-family:Helvetica,Arial,sans-serif}
)CSS";

void render_context(std::ostringstream& out, const json& doc) {
  const json& corpus = doc["corpus"];
  out << "<header id=\"context\"><h1>Teaching analytics report</h1>\n";
  out << "<p><strong>" << escape(corpus["summary_line"].get<std::string>()) << "</strong>, "
      << num(corpus["events"]) << " coded events</p>\n";
  std::set<std::string> objectives;
  for (const auto& m : corpus["session_meta"])
    for (const auto& o : m["learning_objectives"]) objectives.insert(o.get<std::string>());
  if (!objectives.empty()) {
    out << "<p>Learning objectives:</p><ul>";
    for (const auto& o : objectives) out << "<li>" << escape(o) << "</li>";
    out << "</ul>\n";
  }
  out << "<table><tr><th>Session</th><th>Subject</th><th>Duration (ms)</th><th>Class level</th></tr>\n";
  for (const auto& m : corpus["session_meta"]) {
    out << "<tr><td>" << num(m["session_id"]) << "</td><td>" << num(m["subject"]) << "</td><td>"
        << num(m["duration_ms"]) << "</td><td>" << num(m["class_level"]) << "</td></tr>\n";
  }
  out << "</table></header>\n";
}

void render_cognitive(std::ostringstream& out, const json& doc) {
  const json& cog = doc["cognitive"];
  static const char* levels[] = {"Remembering", "Understanding", "Applying", "Analyzing",
                                 "Evaluating",  "Creating",      "Unclassified"};
  double max_count = 1.0;
  for (const char* actor : {"teacher", "student"})
    for (const char* level : levels) max_count = std::max(max_count, cog[actor]["counts"][level].get<double>());

  const double width = 640.0;
  const double height = 220.0;
  const double base = 180.0;
  const double group = width / 7.0;
  out << "<section id=\"cognitive\"><h2>Cognitive level distribution</h2>\n";
  out << "<p>Teacher lower-order share (Remembering + Understanding): " << num(cog["teacher_lower_order_share"])
      << (cog["recall_oriented"].get<bool>() ? " (recall-oriented)" : "") << "</p>\n";
  out << "<svg width=\"" << px(width) << "\" height=\"" << px(height) << "\" role=\"img\">\n";
  for (int k = 0; k < 7; ++k) {
    const double x0 = group * k + 8.0;
    int slot = 0;
    for (const char* actor : {"teacher", "student"}) {
      const json& count = cog[actor]["counts"][levels[k]];
      const double h = 150.0 * count.get<double>() / max_count;
      const double x = x0 + slot * 32.0;
      out << "<rect x=\"" << px(x) << "\" y=\"" << px(base - h) << "\" width=\"28\" height=\"" << px(h)
          << "\" fill=\"" << level_color(levels[k]) << "\" fill-opacity=\"" << (slot == 0 ? "1" : "0.5")
          << "\"/>";
      out << "<text x=\"" << px(x + 14.0) << "\" y=\"" << px(base - h - 3.0) << "\" text-anchor=\"middle\">"
          << num(count) << "</text>\n";
      ++slot;
    }
    out << "<text x=\"" << px(x0 + 30.0) << "\" y=\"" << px(base + 14.0) << "\" text-anchor=\"middle\">"
        << levels[k] << "</text>\n";
  }
  out << "</svg>\n<p class=\"legend\"><span>solid: teacher (" << num(cog["teacher"]["total"])
      << ")</span><span>faded: student (" << num(cog["student"]["total"]) << ")</span></p></section>\n";
}

void render_projection(std::ostringstream& out, const json& doc) {
  const json& proj = doc["projection"];
  if (!proj["present"].get<bool>()) return;
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  bool first = true;
  for (const auto& p : proj["points"]) {
    const double x = p["x"].get<double>();
    const double y = p["y"].get<double>();
    if (first) {
      min_x = max_x = x;
      min_y = max_y = y;
      first = false;
    }
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  }
  const double size = 420.0;
  const double pad = 16.0;
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  out << "<section id=\"semantic-space\"><h2>Semantic space (t-SNE)</h2>\n";
  out << "<p>KL divergence " << num(proj["kl_initial"]) << " &rarr; " << num(proj["kl_final"]) << "</p>\n";
  out << "<svg width=\"" << px(size) << "\" height=\"" << px(size) << "\" role=\"img\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << px(size) << "\" height=\"" << px(size)
      << "\" fill=\"none\" stroke=\"#ddd\"/>\n";
  for (const auto& p : proj["points"]) {
    const double x = pad + (size - 2 * pad) * (p["x"].get<double>() - min_x) / span_x;
    const double y = size - pad - (size - 2 * pad) * (p["y"].get<double>() - min_y) / span_y;
    const char* color = level_color(p["level"].get<std::string>());
    if (p["actor"] == "teacher")
      out << "<circle cx=\"" << px(x) << "\" cy=\"" << px(y) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    else
      out << "<rect x=\"" << px(x - 3.5) << "\" y=\"" << px(y - 3.5) << "\" width=\"7\" height=\"7\" fill=\""
          << color << "\"/>\n";
  }
  out << "</svg>\n<p class=\"muted\">circles: teacher utterances; squares: student utterances; color: cognitive "
         "level</p></section>\n";
}

void render_network(std::ostringstream& out, const json& network) {
  const json& nodes = network["nodes"];
  const std::size_t n = nodes.size();
  const double size = 560.0;
  const double cx = size / 2.0;
  const double cy = size / 2.0;
  const double radius = size / 2.0 - 110.0;
  std::vector<std::pair<double, double>> pos(n);
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) - std::numbers::pi / 2.0;
    pos[k] = {cx + radius * std::cos(angle), cy + radius * std::sin(angle)};
    index[nodes[k]["code"].get<std::string>()] = k;
  }
  out << "<svg id=\"network\" width=\"" << px(size) << "\" height=\"" << px(size) << "\" role=\"img\">\n<defs>";
  for (const char* t : {"TT", "TS", "ST", "SS"}) {
    out << "<marker id=\"arrow-" << t << "\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"4\" "
        << "markerHeight=\"4\" orient=\"auto-start-reverse\"><path d=\"M0,0L10,5L0,10z\" fill=\"" << itype_color(t)
        << "\"/></marker>";
  }
  out << "</defs>\n";
  for (const auto& e : network["edges"]) {
    const std::string itype = e["itype"].get<std::string>();
    const double z = e["z"].get<double>();
    const std::string width = json(edge_stroke_width(z)).dump();
    const auto a = pos[index.at(e["antecedent"].get<std::string>())];
    const auto b = pos[index.at(e["consequent"].get<std::string>())];
    out << "<path class=\"edge\" data-z=\"" << num(e["z"]) << "\" data-itype=\"" << itype << "\" stroke=\""
        << itype_color(itype) << "\" stroke-width=\"" << width << "\" stroke-opacity=\"0.7\" fill=\"none\" "
        << "marker-end=\"url(#arrow-" << itype << ")\" d=\"";
    if (a == b) {
      // self-loop drawn outward from the circle
      const double dx = a.first - cx;
      const double dy = a.second - cy;
      const double len = std::max(std::hypot(dx, dy), 1e-9);
      const double ox = a.first + 28.0 * dx / len;
      const double oy = a.second + 28.0 * dy / len;
      out << "M" << px(a.first) << "," << px(a.second) << " C" << px(ox - 14.0 * dy / len) << ","
          << px(oy + 14.0 * dx / len) << " " << px(ox + 14.0 * dy / len) << "," << px(oy - 14.0 * dx / len) << " "
          << px(a.first) << "," << px(a.second);
    } else {
      // shorten to the node rim so the arrowhead stays visible
      const double dx = b.first - a.first;
      const double dy = b.second - a.second;
      const double len = std::max(std::hypot(dx, dy), 1e-9);
      const double ex = b.first - 9.0 * dx / len;
      const double ey = b.second - 9.0 * dy / len;
      // slight curve keeps A→B and B→A apart
      const double mx = (a.first + ex) / 2.0 - 18.0 * dy / len;
      const double my = (a.second + ey) / 2.0 + 18.0 * dx / len;
      out << "M" << px(a.first) << "," << px(a.second) << " Q" << px(mx) << "," << px(my) << " " << px(ex) << ","
          << px(ey);
    }
    out << "\"><title>" << escape(e["antecedent"].get<std::string>()) << " &rarr; "
        << escape(e["consequent"].get<std::string>()) << " z=" << num(e["z"]) << "</title></path>\n";
  }
  for (std::size_t k = 0; k < n; ++k) {
    const auto [x, y] = pos[k];
    const std::string actor = nodes[k]["actor"].get<std::string>();
    out << "<circle class=\"node\" cx=\"" << px(x) << "\" cy=\"" << px(y) << "\" r=\"7\" fill=\""
        << actor_color(actor) << "\"/>";
    const bool right = x >= cx;
    out << "<text x=\"" << px(x + (right ? 10.0 : -10.0)) << "\" y=\"" << px(y + 3.0) << "\" text-anchor=\""
        << (right ? "start" : "end") << "\">" << escape(nodes[k]["code"].get<std::string>()) << "</text>\n";
  }
  out << "</svg>\n";
}

void render_boxplots(std::ostringstream& out, const json& dist) {
  if (dist.empty()) return;
  double lo = dist[0]["min"].get<double>();
  double hi = dist[0]["max"].get<double>();
  for (const auto& d : dist) {
    lo = std::min(lo, d["min"].get<double>());
    hi = std::max(hi, d["max"].get<double>());
  }
  if (hi - lo < 1e-9) hi = lo + 1.0;
  const double width = 480.0;
  const double height = 240.0;
  const double top = 16.0;
  const double bottom = 200.0;
  auto y_of = [&](double z) { return bottom - (bottom - top) * (z - lo) / (hi - lo); };
  out << "<svg id=\"zdist\" width=\"" << px(width) << "\" height=\"" << px(height) << "\" role=\"img\">\n";
  const double slot = width / static_cast<double>(dist.size());
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const json& d = dist[k];
    const std::string itype = d["itype"].get<std::string>();
    const double xc = slot * (static_cast<double>(k) + 0.5);
    const char* color = itype_color(itype);
    out << "<line x1=\"" << px(xc) << "\" x2=\"" << px(xc) << "\" y1=\"" << px(y_of(d["min"].get<double>()))
        << "\" y2=\"" << px(y_of(d["max"].get<double>())) << "\" stroke=\"" << color << "\"/>";
    out << "<rect x=\"" << px(xc - 22.0) << "\" y=\"" << px(y_of(d["q3"].get<double>())) << "\" width=\"44\" height=\""
        << px(y_of(d["q1"].get<double>()) - y_of(d["q3"].get<double>())) << "\" fill=\"" << color
        << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\"/>";
    out << "<line x1=\"" << px(xc - 22.0) << "\" x2=\"" << px(xc + 22.0) << "\" y1=\""
        << px(y_of(d["median"].get<double>())) << "\" y2=\"" << px(y_of(d["median"].get<double>()))
        << "\" stroke=\"#222\" stroke-width=\"2\"/>";
    out << "<text x=\"" << px(xc) << "\" y=\"" << px(bottom + 16.0) << "\" text-anchor=\"middle\">" << itype
        << " (n=" << num(d["count"]) << ")</text>";
    out << "<text x=\"" << px(xc) << "\" y=\"" << px(bottom + 30.0) << "\" text-anchor=\"middle\">median "
        << num(d["median"]) << "</text>\n";
  }
  out << "</svg>\n";
}

void render_lsa(std::ostringstream& out, const json& doc) {
  const json& lsa = doc["lsa"];
  out << "<section id=\"lsa\"><h2>Lag sequential analysis</h2>\n";
  if (!lsa["present"].get<bool>()) {
    out << "<p>Not enough coded transitions for sequential analysis.</p></section>\n";
    return;
  }
  out << "<p>" << num(lsa["total_transitions"]) << " transitions at lag " << num(lsa["lag"]) << " over "
      << num(lsa["vocabulary_size"]) << " codes; " << num(lsa["significant_count"])
      << " significant patterns at z &ge; " << num(lsa["z_threshold"]) << ".</p>\n";
  out << "<table><tr><th>Interaction type</th><th>Patterns</th><th>Share</th></tr>\n";
  for (const char* t : {"TT", "TS", "ST", "SS"}) {
    const json& entry = lsa["breakdown"]["types"][t];
    out << "<tr><td>" << t << "</td><td>" << num(entry["count"]) << "</td><td>" << num(entry["percent"])
        << "%</td></tr>\n";
  }
  out << "</table><p class=\"muted\">Percentages over " << num(lsa["breakdown"]["denominator"])
      << " patterns.</p>\n";
  out << "<h2>z-score distribution by interaction type</h2>\n";
  render_boxplots(out, lsa["z_distribution"]);
  out << "<h2>Sequential network (z &ge; " << num(lsa["network"]["z_min"]) << ", " << num(lsa["network_edge_count"])
      << " edges)</h2>\n";
  render_network(out, lsa["network"]);
  out << "<p class=\"legend\">";
  for (const char* t : {"TT", "TS", "ST", "SS"})
    out << "<span><i class=\"swatch\" style=\"background:" << itype_color(t) << "\"></i>" << t << "</span>";
  out << "<span>stroke width = " << num(lsa["network"]["stroke_px_per_z"]) << " px per unit z</span></p></section>\n";
}

void render_heatmap(std::ostringstream& out, const json& h) {
  const std::size_t rows = h["rows"].get<std::size_t>();
  const std::size_t cols = h["cols"].get<std::size_t>();
  double max_v = 0.0;
  for (const auto& row : h["grid"])
    for (const auto& v : row) max_v = std::max(max_v, v.get<double>());
  const double cell = std::max(4.0, std::min(24.0, 480.0 / static_cast<double>(std::max(rows, cols))));
  out << "<svg id=\"heatmap\" width=\"" << px(cell * static_cast<double>(cols)) << "\" height=\""
      << px(cell * static_cast<double>(rows)) << "\" role=\"img\">\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = h["grid"][r][c].get<double>();
      const double t = max_v > 0.0 ? v / max_v : 0.0;
      const int g = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      out << "<rect x=\"" << px(cell * static_cast<double>(c)) << "\" y=\"" << px(cell * static_cast<double>(rows - 1 - r))
          << "\" width=\"" << px(cell) << "\" height=\"" << px(cell) << "\" fill=\"rgb(255," << g << "," << g
          << ")\"/>";
    }
    out << "\n";
  }
  out << "</svg>\n";
}

void render_gaze(std::ostringstream& out, const json& doc) {
  const json& gaze = doc["gaze"];
  out << "<section id=\"gaze\"><h2>Gaze</h2>\n";
  if (!gaze["present"].get<bool>()) {
    out << "<p>No gaze data in this corpus.</p></section>\n";
    return;
  }
  const json& corpus = gaze["corpus"];
  out << "<p>Attention entropy " << num(corpus["entropy"]) << ", gaze Gini " << num(corpus["gini"]) << ". "
      << num(corpus["fixation_count"]) << " fixations (mean " << num(corpus["mean_fixation_ms"]) << " ms), "
      << num(corpus["saccade_count"]) << " saccades (mean amplitude " << num(corpus["mean_saccade_deg"])
      << "&deg;).</p>\n";
  out << "<table><tr><th>Student</th><th>Dwell (ms)</th></tr>\n";
  for (const auto& d : corpus["dwell"]["per_student"])
    out << "<tr><td>" << num(d["student"]) << "</td><td>" << num(d["dwell_ms"]) << "</td></tr>\n";
  out << "<tr><td>off target</td><td>" << num(corpus["dwell"]["off_target_ms"]) << "</td></tr></table>\n";
  out << "<h2>Floor heatmap (" << num(gaze["heatmap_mode"]) << ", " << num(gaze["heatmap"]["total_mass"])
      << " mass over " << num(gaze["heatmap_sessions"]) << " sessions, cell " << num(gaze["heatmap"]["cell_size_m"])
      << " m)</h2>\n";
  render_heatmap(out, gaze["heatmap"]);
  out << "</section>\n";
}

void render_equity(std::ostringstream& out, const json& doc) {
  const json& eq = doc["equity"];
  out << "<section id=\"equity\"><h2>Equity indicators</h2>\n";
  out << "<p>Teacher speaking-time ratio " << num(eq["teacher_speaking_ratio"]) << " (teacher "
      << num(eq["teacher_talk_ms"]) << " ms, students " << num(eq["student_talk_ms"]) << " ms). Turn Gini "
      << num(eq["turn_gini"]) << ".</p>\n";
  out << "<table><tr><th>Student</th><th>Turns</th></tr>\n";
  for (const auto& s : eq["student_turns"])
    out << "<tr><td>" << num(s["student"]) << "</td><td>" << num(s["turns"]) << "</td></tr>\n";
  out << "</table></section>\n";
}

void render_feedback(std::ostringstream& out, const json& doc) {
  out << "<section id=\"feedback\" class=\"feedback\"><h2>Feedback</h2>\n<ul>\n";
  for (const auto& m : doc["feedback"]["messages"])
    out << "<li data-rule=\"" << escape(m["rule_id"].get<std::string>()) << "\">" << escape(m["text"].get<std::string>())
        << "</li>\n";
  out << "</ul>\n<p class=\"muted\">Messages are engine-authored templates driven by configurable thresholds.</p>"
      << "</section>\n";
}

}  // namespace

std::string render_html(const ReportBundle& bundle) {
  const json doc = to_json(bundle);
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\">"
      << "<title>Teaching analytics report</title><style>" << kStyle << "</style></head>\n<body>\n";
  render_context(out, doc);
  render_cognitive(out, doc);
  render_projection(out, doc);
  render_lsa(out, doc);
  render_gaze(out, doc);
  render_equity(out, doc);
  render_feedback(out, doc);
  out << "<footer class=\"muted\">schema " << num(doc["schema_version"]) << "</footer>\n</body></html>\n";
  return out.str();
}

}  // namespace tga
