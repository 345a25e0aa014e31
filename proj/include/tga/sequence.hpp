#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tga/session_model.hpp"

namespace tga {

struct SequenceItem {
  TimeMs t_ms = 0;
  BehaviorCode code;
  Actor actor;
};

// One session's coded events in time order.
struct CodeSequence {
  std::string session_id;
  std::vector<SequenceItem> items;
};

// Events only; utterances are analyzed separately. Sessions stay separate so
// no transition crosses a boundary.
std::vector<CodeSequence> extract_sequences(std::span<const SessionLog> logs);

// Lag-`lag` transition counts; rows are antecedents, columns consequents.
// The vocabulary is every code taking part in at least one counted
// transition, sorted by canonical string.
struct TransitionMatrix {
  std::vector<BehaviorCode> codes;
  std::vector<std::size_t> counts;  // codes.size()² row-major
  std::size_t total = 0;            // N

  std::size_t size() const { return codes.size(); }
  std::size_t at(std::size_t row, std::size_t col) const { return counts[row * codes.size() + col]; }
  std::size_t row_sum(std::size_t row) const;
  std::size_t col_sum(std::size_t col) const;
  std::optional<std::size_t> index_of(const BehaviorCode& code) const;
};

TransitionMatrix transition_counts(std::span<const CodeSequence> sequences, std::size_t lag = 1);

struct LagResult {
  BehaviorCode antecedent;
  BehaviorCode consequent;
  std::size_t observed = 0;
  double expected = 0.0;
  std::optional<double> z;  // empty where the residual's variance is zero
  InteractionType itype = InteractionType::TT;
};

// Allison–Liker adjusted residuals for every cell, row-major over the
// matrix vocabulary:
//   E = r_i c_j / N,  z = (O − E) / sqrt(E (1 − r_i/N)(1 − c_j/N)).
// Throws EmptyMatrix when N < 2.
std::vector<LagResult> allison_liker_z(const TransitionMatrix& matrix);

inline constexpr double kDefaultZThreshold = 1.96;
inline constexpr double kDefaultNetworkZ = 10.0;

// Cells with z ≥ threshold, by z descending, then antecedent and consequent.
std::vector<LagResult> significant_patterns(std::span<const LagResult> results,
                                            double z_threshold = kDefaultZThreshold);

enum class DenominatorPolicy {
  AllSignificant,     // every pattern passed in
  SumOfReportedTypes, // only patterns whose type is in `reported`
  Explicit,           // a caller-supplied count
};

struct BreakdownOptions {
  DenominatorPolicy policy = DenominatorPolicy::AllSignificant;
  std::array<bool, 4> reported{true, true, true, true};  // indexed by InteractionType
  std::size_t explicit_denominator = 0;
};

struct TypeBreakdown {
  std::array<std::size_t, 4> counts{};
  std::array<double, 4> percentages{};  // 100·count/denominator, one decimal
  std::size_t denominator = 0;

  std::size_t count(InteractionType t) const { return counts[static_cast<std::size_t>(t)]; }
  double percentage(InteractionType t) const { return percentages[static_cast<std::size_t>(t)]; }
};

TypeBreakdown type_breakdown(std::span<const LagResult> patterns, const BreakdownOptions& options = {});
TypeBreakdown breakdown_from_counts(const std::array<std::size_t, 4>& counts, std::size_t denominator);

// Half-away-from-zero rounding of 100·count/denominator to one decimal.
double percent_one_decimal(std::size_t count, std::size_t denominator);
// "34.8%"
std::string format_percent(double percent);
// e.g. "TT 69 (34.8%)"; types with zero count are listed too.
std::string format_breakdown_entry(const TypeBreakdown& breakdown, InteractionType type);

struct FiveNumberSummary {
  InteractionType itype = InteractionType::TT;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

// Linear-interpolation quantile of sorted data at p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

// Per interaction type with at least one defined z, in TT, TS, ST, SS order.
std::vector<FiveNumberSummary> zscore_distribution(std::span<const LagResult> results);

struct NetworkNode {
  BehaviorCode code;
  ActorKind actor = ActorKind::Teacher;
};

struct SequentialNetwork {
  std::vector<NetworkNode> nodes;  // sorted by code
  std::vector<LagResult> edges;    // in input order
  double z_min = kDefaultNetworkZ;

  std::size_t out_degree(const BehaviorCode& code) const;
};

SequentialNetwork build_network(std::span<const LagResult> patterns, double z_min = kDefaultNetworkZ);

nlohmann::json to_json(const LagResult& result);
nlohmann::json to_json(const TypeBreakdown& breakdown);
nlohmann::json to_json(const FiveNumberSummary& summary);
nlohmann::json to_json(const SequentialNetwork& network);

// The `lsa.json` export.
nlohmann::json lsa_export(const TransitionMatrix& matrix, std::span<const LagResult> cells,
                          const TypeBreakdown& breakdown, const SequentialNetwork& network);

}  // namespace tga
