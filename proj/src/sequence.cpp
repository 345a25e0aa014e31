#include "tga/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace tga {

std::vector<CodeSequence> extract_sequences(std::span<const SessionLog> logs) {
  std::vector<CodeSequence> sequences;
  sequences.reserve(logs.size());
  for (const auto& log : logs) {
    CodeSequence seq{log.meta.session_id, {}};
    seq.items.reserve(log.events.size());
    for (const auto& e : log.events) seq.items.push_back({e.t_ms, e.code, e.actor});
    std::stable_sort(seq.items.begin(), seq.items.end(),
                     [](const SequenceItem& a, const SequenceItem& b) { return a.t_ms < b.t_ms; });
    sequences.push_back(std::move(seq));
  }
  return sequences;
}

std::size_t TransitionMatrix::row_sum(std::size_t row) const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < size(); ++c) s += at(row, c);
  return s;
}

std::size_t TransitionMatrix::col_sum(std::size_t col) const {
  std::size_t s = 0;
  for (std::size_t r = 0; r < size(); ++r) s += at(r, col);
  return s;
}

std::optional<std::size_t> TransitionMatrix::index_of(const BehaviorCode& code) const {
  const auto it = std::lower_bound(codes.begin(), codes.end(), code);
  if (it == codes.end() || !(*it == code)) return std::nullopt;
  return static_cast<std::size_t>(it - codes.begin());
}

TransitionMatrix transition_counts(std::span<const CodeSequence> sequences, std::size_t lag) {
  if (lag == 0) throw std::invalid_argument("lag must be >= 1");
  std::set<BehaviorCode> vocabulary;
  for (const auto& seq : sequences) {
    for (std::size_t i = 0; i + lag < seq.items.size(); ++i) {
      vocabulary.insert(seq.items[i].code);
      vocabulary.insert(seq.items[i + lag].code);
    }
  }
  TransitionMatrix m;
  m.codes.assign(vocabulary.begin(), vocabulary.end());
  m.counts.assign(m.codes.size() * m.codes.size(), 0);
  for (const auto& seq : sequences) {
    for (std::size_t i = 0; i + lag < seq.items.size(); ++i) {
      const std::size_t r = *m.index_of(seq.items[i].code);
      const std::size_t c = *m.index_of(seq.items[i + lag].code);
      ++m.counts[r * m.codes.size() + c];
      ++m.total;
    }
  }
  return m;
}

std::vector<LagResult> allison_liker_z(const TransitionMatrix& matrix) {
  if (matrix.total < 2)
    throw Error(ErrorCode::EmptyMatrix, "N = " + std::to_string(matrix.total) + ", need at least 2 transitions");
  const std::size_t k = matrix.size();
  const double n = static_cast<double>(matrix.total);
  std::vector<double> rows(k);
  std::vector<double> cols(k);
  for (std::size_t i = 0; i < k; ++i) {
    rows[i] = static_cast<double>(matrix.row_sum(i));
    cols[i] = static_cast<double>(matrix.col_sum(i));
  }
  std::vector<LagResult> results;
  results.reserve(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto observed = matrix.at(i, j);
      const double expected = rows[i] * cols[j] / n;
      const double variance = expected * (1.0 - rows[i] / n) * (1.0 - cols[j] / n);
      std::optional<double> z;
      if (variance > 0.0) z = (static_cast<double>(observed) - expected) / std::sqrt(variance);
      results.push_back({matrix.codes[i], matrix.codes[j], observed, expected, z,
                         interaction_type(matrix.codes[i].actor(), matrix.codes[j].actor())});
    }
  }
  return results;
}

std::vector<LagResult> significant_patterns(std::span<const LagResult> results, double z_threshold) {
  std::vector<LagResult> out;
  for (const auto& r : results)
    if (r.z && *r.z >= z_threshold) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const LagResult& a, const LagResult& b) {
    if (*a.z != *b.z) return *a.z > *b.z;
    if (!(a.antecedent == b.antecedent)) return a.antecedent < b.antecedent;
    return a.consequent < b.consequent;
  });
  return out;
}

double percent_one_decimal(std::size_t count, std::size_t denominator) {
  if (denominator == 0) return 0.0;
  const double tenths = std::round(1000.0 * static_cast<double>(count) / static_cast<double>(denominator));
  return tenths / 10.0;
}

std::string format_percent(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", percent);
  return buf;
}

std::string format_breakdown_entry(const TypeBreakdown& breakdown, InteractionType type) {
  return std::string(to_string(type)) + " " + std::to_string(breakdown.count(type)) + " (" +
         format_percent(breakdown.percentage(type)) + ")";
}

TypeBreakdown breakdown_from_counts(const std::array<std::size_t, 4>& counts, std::size_t denominator) {
  TypeBreakdown b;
  b.counts = counts;
  b.denominator = denominator;
  for (std::size_t t = 0; t < 4; ++t) b.percentages[t] = percent_one_decimal(counts[t], denominator);
  return b;
}

TypeBreakdown type_breakdown(std::span<const LagResult> patterns, const BreakdownOptions& options) {
  std::array<std::size_t, 4> counts{};
  for (const auto& p : patterns) ++counts[static_cast<std::size_t>(p.itype)];
  std::size_t denominator = 0;
  switch (options.policy) {
    case DenominatorPolicy::AllSignificant:
      denominator = patterns.size();
      break;
    case DenominatorPolicy::SumOfReportedTypes:
      for (std::size_t t = 0; t < 4; ++t)
        if (options.reported[t]) denominator += counts[t];
      break;
    case DenominatorPolicy::Explicit:
      denominator = options.explicit_denominator;
      break;
  }
  return breakdown_from_counts(counts, denominator);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<FiveNumberSummary> zscore_distribution(std::span<const LagResult> results) {
  std::array<std::vector<double>, 4> by_type;
  for (const auto& r : results)
    if (r.z) by_type[static_cast<std::size_t>(r.itype)].push_back(*r.z);
  std::vector<FiveNumberSummary> out;
  for (InteractionType t : kAllInteractionTypes) {
    auto& values = by_type[static_cast<std::size_t>(t)];
    if (values.empty()) continue;
    std::sort(values.begin(), values.end());
    out.push_back({t, values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5),
                   quantile_sorted(values, 0.75), values.back(), values.size()});
  }
  return out;
}

std::size_t SequentialNetwork::out_degree(const BehaviorCode& code) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const LagResult& e) { return e.antecedent == code; }));
}

SequentialNetwork build_network(std::span<const LagResult> patterns, double z_min) {
  SequentialNetwork net;
  net.z_min = z_min;
  std::set<BehaviorCode> endpoints;
  for (const auto& p : patterns) {
    if (!p.z || *p.z < z_min) continue;
    net.edges.push_back(p);
    endpoints.insert(p.antecedent);
    endpoints.insert(p.consequent);
  }
  for (const auto& code : endpoints) net.nodes.push_back({code, code.actor()});
  return net;
}

nlohmann::json to_json(const LagResult& r) {
  return {{"antecedent", r.antecedent.str()},
          {"consequent", r.consequent.str()},
          {"observed", r.observed},
          {"expected", r.expected},
          {"z", r.z ? nlohmann::json(*r.z) : nlohmann::json(nullptr)},
          {"itype", std::string(to_string(r.itype))}};
}

nlohmann::json to_json(const TypeBreakdown& b) {
  nlohmann::json types;
  for (InteractionType t : kAllInteractionTypes)
    types[std::string(to_string(t))] = {{"count", b.count(t)}, {"percent", b.percentage(t)}};
  return {{"types", std::move(types)}, {"denominator", b.denominator}};
}

nlohmann::json to_json(const FiveNumberSummary& s) {
  return {{"itype", std::string(to_string(s.itype))}, {"min", s.min},       {"q1", s.q1},
          {"median", s.median},                       {"q3", s.q3},         {"max", s.max},
          {"count", s.count}};
}

nlohmann::json to_json(const SequentialNetwork& net) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : net.nodes) nodes.push_back({{"code", n.code.str()}, {"actor", std::string(to_string(n.actor))}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : net.edges) edges.push_back(to_json(e));
  return {{"z_min", net.z_min}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

nlohmann::json lsa_export(const TransitionMatrix& matrix, std::span<const LagResult> cells,
                          const TypeBreakdown& breakdown, const SequentialNetwork& network) {
  nlohmann::json vocabulary = nlohmann::json::array();
  for (const auto& c : matrix.codes) vocabulary.push_back(c.str());
  nlohmann::json counts = nlohmann::json::array();
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < matrix.size(); ++c) row.push_back(matrix.at(r, c));
    counts.push_back(std::move(row));
  }
  nlohmann::json cell_json = nlohmann::json::array();
  for (const auto& cell : cells) cell_json.push_back(to_json(cell));
  return {{"vocabulary", std::move(vocabulary)},
          {"counts", std::move(counts)},
          {"total_transitions", matrix.total},
          {"cells", std::move(cell_json)},
          {"breakdown", to_json(breakdown)},
          {"network", to_json(network)}};
}

}  // namespace tga
