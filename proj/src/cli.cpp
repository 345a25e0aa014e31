#include "tga/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "tga/discourse.hpp"
#include "tga/error.hpp"
#include "tga/ingest.hpp"
#include "tga/report.hpp"
#include "tga/synth.hpp"
#include "tga/tsne.hpp"

namespace tga {

using nlohmann::json;
namespace fs = std::filesystem;

std::size_t worker_count() {
  if (const char* env = std::getenv("TGA_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), n);
  if (threads <= 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(drain);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

// Input problems found while reading a corpus; reported as exit 1.
struct InputFailure {
  std::vector<json> reports;
};

struct Diagnostics {
  std::ostream& err;
  bool json_errors = false;

  int fail(int exit_code, const std::string& error, const std::string& detail) const {
    if (json_errors)
      err << json{{"error", error}, {"detail", detail}, {"exit", exit_code}}.dump() << '\n';
    else
      err << "tga: " << error << ": " << detail << '\n';
    return exit_code;
  }
  int fail(int exit_code, const Error& e) const { return fail(exit_code, std::string(to_string(e.code())), e.detail()); }
};

json file_report(const std::string& path, const ValidationReport& report) {
  json j = to_json(report);
  j["file"] = path;
  j["ok"] = !report.fatal;
  return j;
}

json parse_failure_report(const std::string& path, const Error& e) {
  return json{{"file", path},
              {"ok", false},
              {"fatal", true},
              {"violations", json::array({json{{"record_index", -1},
                                               {"rule", "parse_error"},
                                               {"detail", std::string(to_string(e.code())) + ": " + e.detail()}}})}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir, ec))
    throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
}

// ---- validate -------------------------------------------------------------

int cmd_validate(const std::vector<std::string>& paths, std::ostream& out) {
  std::vector<json> reports(paths.size());
  parallel_for(paths.size(), worker_count(), [&](std::size_t i) {
    try {
      reports[i] = file_report(paths[i], validate(parse_session_file(paths[i])));
    } catch (const Error& e) {
      reports[i] = parse_failure_report(paths[i], e);
    }
  });
  bool ok = true;
  for (const auto& r : reports) {
    out << r.dump() << '\n';
    ok = ok && r["ok"].get<bool>();
  }
  return ok ? kExitOk : kExitValidation;
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeArgs {
  std::vector<std::string> paths;
  std::string out_dir = "out";
  std::vector<std::string> labels;
  std::vector<std::string> embeddings;
  std::string lexicon;
  std::string rules;
  std::uint64_t seed = 0;
  double perplexity = TsneConfig{}.perplexity;
  std::size_t lag = 1;
  double z_threshold = kDefaultZThreshold;
  double network_z = kDefaultNetworkZ;
  double dispersion_deg = FixationConfig{}.dispersion_threshold_deg;
  TimeMs min_fixation_ms = FixationConfig{}.min_duration_ms;
  double heatmap_cell = HeatmapConfig{}.cell_size_m;
  double heatmap_sigma = HeatmapConfig{}.sigma_m;
  std::string heatmap_mode = "samples";
  std::string denominator = "all";
  std::vector<std::string> report_types;
};

// Sidecars pair with session paths by position; "-" skips a session.
std::vector<std::optional<std::string>> pair_sidecars(const std::vector<std::string>& given, std::size_t sessions,
                                                      const char* flag) {
  std::vector<std::optional<std::string>> paired(sessions);
  if (given.empty()) return paired;
  if (given.size() != sessions)
    throw CLI::ValidationError(std::string(flag), "expected one entry per session path (use '-' to skip a session)");
  for (std::size_t i = 0; i < sessions; ++i)
    if (given[i] != "-") paired[i] = given[i];
  return paired;
}

AnalysisOptions analysis_options(const AnalyzeArgs& a) {
  AnalysisOptions opt;
  opt.lag = a.lag;
  opt.z_threshold = a.z_threshold;
  opt.network_z = a.network_z;
  opt.fixation = {a.dispersion_deg, a.min_fixation_ms};
  opt.heatmap = {a.heatmap_cell, a.heatmap_sigma};
  opt.heatmap_mode = a.heatmap_mode == "fixations" ? HeatmapMode::Fixations : HeatmapMode::Samples;
  opt.tsne.perplexity = a.perplexity;
  opt.tsne.seed = a.seed;
  if (!a.report_types.empty()) {
    opt.breakdown.policy = DenominatorPolicy::SumOfReportedTypes;
    opt.breakdown.reported = {false, false, false, false};
    for (const auto& name : a.report_types) {
      const auto it = std::find_if(kAllInteractionTypes.begin(), kAllInteractionTypes.end(),
                                   [&](InteractionType t) { return to_string(t) == name; });
      if (it == kAllInteractionTypes.end())
        throw CLI::ValidationError("--report-types", "unknown interaction type '" + name + "'");
      opt.breakdown.reported[static_cast<std::size_t>(*it)] = true;
    }
  }
  if (a.denominator != "all") {
    std::size_t used = 0;
    unsigned long long n = 0;
    try {
      n = std::stoull(a.denominator, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != a.denominator.size() || n == 0)
      throw CLI::ValidationError("--denominator", "expected 'all' or a positive integer");
    opt.breakdown.policy = DenominatorPolicy::Explicit;
    opt.breakdown.explicit_denominator = static_cast<std::size_t>(n);
  }
  return opt;
}

std::vector<SessionLog> load_corpus(const AnalyzeArgs& a, const Lexicon& lexicon, std::size_t workers) {
  const std::size_t n = a.paths.size();
  const auto label_paths = pair_sidecars(a.labels, n, "--labels");
  std::vector<SessionLog> logs(n);
  std::vector<json> failures(n);
  parallel_for(n, workers, [&](std::size_t i) {
    try {
      SessionLog log = parse_session_file(a.paths[i]);
      const auto report = validate(log);
      if (report.fatal) {
        failures[i] = file_report(a.paths[i], report);
        return;
      }
      if (label_paths[i]) log = apply_sidecar_labels(log, read_label_sidecar(*label_paths[i]));
      label_unlabeled(log, lexicon);
      logs[i] = std::move(log);
    } catch (const Error& e) {
      failures[i] = parse_failure_report(a.paths[i], e);
    }
  });
  InputFailure failure;
  for (auto& f : failures)
    if (!f.is_null()) failure.reports.push_back(std::move(f));
  if (!failure.reports.empty()) throw failure;
  return logs;
}

std::optional<Projection2D> project_corpus(const AnalyzeArgs& a, std::span<const SessionLog> logs,
                                           const TsneConfig& cfg) {
  const auto paths = pair_sidecars(a.embeddings, logs.size(), "--embeddings");
  std::vector<EmbeddedUtterance> inputs;
  std::optional<std::size_t> dim;
  for (std::size_t s = 0; s < logs.size(); ++s) {
    if (!paths[s]) continue;
    const EmbeddingSidecar sidecar = read_embedding_sidecar(*paths[s]);
    if (dim && *dim != sidecar.dim)
      throw Error(ErrorCode::DimensionMismatch,
                  *paths[s] + ": dim " + std::to_string(sidecar.dim) + " differs from " + std::to_string(*dim));
    dim = sidecar.dim;
    for (const auto& entry : sidecar.entries) {
      if (entry.utterance_index >= logs[s].utterances.size())
        throw Error(ErrorCode::IndexOutOfRange, *paths[s] + ": utterance_index " + std::to_string(entry.utterance_index));
      const auto& u = logs[s].utterances[entry.utterance_index];
      inputs.push_back({s, entry.utterance_index, u.level, u.actor.kind, entry.vector});
    }
  }
  if (!dim) return std::nullopt;
  return tsne_project(inputs, cfg);
}

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLexicon:
    case ErrorCode::MalformedRules:
    case ErrorCode::BadMetricPath:
    case ErrorCode::MalformedConfig:
      return kExitUsage;
    case ErrorCode::MalformedSidecar:
    case ErrorCode::DuplicateIndex:
    case ErrorCode::IndexOutOfRange:
      return kExitValidation;
    default:
      return kExitAnalysis;
  }
}

int cmd_analyze(const AnalyzeArgs& a, const AnalysisOptions& options, std::ostream& out, const Diagnostics& diag) {
  try {
    const Lexicon lexicon = a.lexicon.empty() ? Lexicon::shipped() : Lexicon::from_file(a.lexicon);
    const std::vector<FeedbackRule> rules =
        a.rules.empty() ? default_feedback_rules() : read_feedback_rules(a.rules);
    const std::size_t workers = worker_count();

    const std::vector<SessionLog> logs = load_corpus(a, lexicon, workers);

    std::vector<SessionGaze> gaze(logs.size());
    parallel_for(logs.size(), workers, [&](std::size_t i) { gaze[i] = analyze_session_gaze(logs[i], options); });

    CorpusAnalyses analyses;
    analyses.logs = logs;
    analyses.lsa = analyze_sequences(logs, options);
    analyses.gaze = aggregate_gaze(std::move(gaze), options.heatmap_mode);
    analyses.projection = project_corpus(a, logs, options.tsne);

    ReportBundle bundle = summarize(analyses);
    bundle.feedback = apply_feedback(bundle, rules);

    const fs::path dir = a.out_dir;
    ensure_directory(dir);
    write_text(dir / "report.json", to_json(bundle).dump(2) + "\n");
    write_text(dir / "report.html", render_html(bundle));
    const json absent = {{"present", false}};
    write_text(dir / "lsa.json",
               (bundle.lsa ? lsa_export(bundle.lsa->matrix, bundle.lsa->cells, bundle.lsa->breakdown, bundle.lsa->network)
                           : absent)
                       .dump(2) +
                   "\n");
    write_text(dir / "gaze.json", (bundle.gaze ? gaze_export(*bundle.gaze) : absent).dump(2) + "\n");
    out << json{{"out", dir.string()},
                {"sessions", bundle.corpus.sessions.size()},
                {"summary", format_corpus_summary(bundle.corpus.sessions.size(), bundle.corpus.turns)}}
               .dump()
        << '\n';
    return kExitOk;
  } catch (const InputFailure& failure) {
    for (const auto& r : failure.reports) diag.err << r.dump() << '\n';
    return diag.fail(kExitValidation, "ValidationFailed",
                     std::to_string(failure.reports.size()) + " input file(s) failed validation");
  } catch (const Error& e) {
    return diag.fail(exit_for(e.code()), e);
  }
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::size_t sessions = 1;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, const Diagnostics& diag) {
  SynthConfig base;
  try {
    base = read_synth_config(a.config);
  } catch (const Error& e) {
    return diag.fail(kExitUsage, e);
  }
  if (a.seed) base.seed = *a.seed;
  try {
    ensure_directory(a.out_dir);
    const int width = static_cast<int>(std::to_string(a.sessions).size());
    for (std::size_t k = 0; k < a.sessions; ++k) {
      SynthConfig cfg = base;
      cfg.seed = base.seed + k;
      if (a.sessions > 1) {
        std::ostringstream id;
        id << base.session_id << '-' << std::setw(std::max(2, width)) << std::setfill('0') << (k + 1);
        cfg.session_id = id.str();
      }
      const fs::path path = fs::path(a.out_dir) / (cfg.session_id + ".session.jsonl");
      write_session_file(generate_session(cfg), path);
      out << path.string() << '\n';
    }
    return kExitOk;
  } catch (const Error& e) {
    return diag.fail(e.code() == ErrorCode::IoError ? kExitAnalysis : kExitUsage, e);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analytics for immersive teacher-simulation session logs", "tga"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors, "Write errors to stderr as JSON")->configurable(false);

  std::vector<std::string> validate_paths;
  auto* validate_cmd = app.add_subcommand("validate", "Check session files against the log schema");
  validate_cmd->add_option("paths", validate_paths, "Session files (*.session.jsonl)")->required();

  AnalyzeArgs aa;
  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze a corpus and write the report");
  analyze_cmd->add_option("paths", aa.paths, "Session files; all files form one corpus")->required();
  analyze_cmd->add_option("--out", aa.out_dir, "Output directory")->capture_default_str();
  analyze_cmd->add_option("--labels", aa.labels, "Label sidecar per session path, in order ('-' to skip)");
  analyze_cmd->add_option("--embeddings", aa.embeddings, "Embedding sidecar per session path, in order ('-' to skip)");
  analyze_cmd->add_option("--lexicon", aa.lexicon, "Replacement Bloom lexicon (JSON)");
  analyze_cmd->add_option("--rules", aa.rules, "Replacement feedback rules (JSON)");
  analyze_cmd->add_option("--seed", aa.seed, "t-SNE seed")->capture_default_str();
  analyze_cmd->add_option("--perplexity", aa.perplexity, "t-SNE perplexity")->capture_default_str()->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--lag", aa.lag, "Transition lag")->capture_default_str()->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--z-threshold", aa.z_threshold, "Significance cut for adjusted residuals")->capture_default_str();
  analyze_cmd->add_option("--network-z", aa.network_z, "Minimum z for network edges")->capture_default_str();
  analyze_cmd->add_option("--dispersion-deg", aa.dispersion_deg, "I-DT dispersion threshold (degrees)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--min-fixation-ms", aa.min_fixation_ms, "Minimum fixation duration (ms)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  analyze_cmd->add_option("--heatmap-cell", aa.heatmap_cell, "Heatmap cell size (m)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--heatmap-sigma", aa.heatmap_sigma, "Gaussian splat sigma (m); 0 bins by cell")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  analyze_cmd->add_option("--heatmap-mode", aa.heatmap_mode, "samples or fixations")
      ->capture_default_str()
      ->check(CLI::IsMember({"samples", "fixations"}));
  analyze_cmd->add_option("--denominator", aa.denominator, "Breakdown denominator: all or an integer")
      ->capture_default_str();
  analyze_cmd->add_option("--report-types", aa.report_types, "Interaction types counted in the denominator")
      ->delimiter(',');

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic session logs from a config");
  synth_cmd->add_option("config", sa.config, "Generator config (JSON)")->required();
  synth_cmd->add_option("--seed", sa.seed, "Overrides the config seed");
  synth_cmd->add_option("--out", sa.out_dir, "Output directory")->capture_default_str();
  synth_cmd->add_option("--sessions", sa.sessions, "Number of sessions; seeds are seed, seed+1, ...")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    Diagnostics diag{err, json_errors};
    return diag.fail(kExitUsage, "UsageError", e.what());
  }

  Diagnostics diag{err, json_errors};
  if (validate_cmd->parsed()) return cmd_validate(validate_paths, out);
  if (analyze_cmd->parsed()) {
    AnalysisOptions options;
    try {
      options = analysis_options(aa);
      pair_sidecars(aa.labels, aa.paths.size(), "--labels");
      pair_sidecars(aa.embeddings, aa.paths.size(), "--embeddings");
    } catch (const CLI::ParseError& e) {
      return diag.fail(kExitUsage, "UsageError", e.what());
    }
    return cmd_analyze(aa, options, out, diag);
  }
  if (synth_cmd->parsed()) return cmd_synth(sa, out, diag);
  return diag.fail(kExitUsage, "UsageError", "no subcommand");
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace tga
