#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tga/error.hpp"
#include "tga/sequence.hpp"

using namespace tga;
using namespace tga::testing;

namespace {

const std::string A = "t_a_remembering";
const std::string B = "t_b_understanding";
const std::string C = "t_c_applying";
const std::string D = "t_d_analyzing";

TransitionMatrix matrix_of(const std::vector<std::vector<std::string>>& sessions, std::size_t lag = 1) {
  std::vector<SessionLog> logs;
  for (std::size_t i = 0; i < sessions.size(); ++i) logs.push_back(log_from_codes(sessions[i], "s" + std::to_string(i)));
  return transition_counts(extract_sequences(logs), lag);
}

std::size_t count_of(const TransitionMatrix& m, const std::string& a, const std::string& b) {
  const auto r = m.index_of(parse_behavior_code(a));
  const auto c = m.index_of(parse_behavior_code(b));
  if (!r || !c) return 0;
  return m.at(*r, *c);
}

const LagResult& cell(const std::vector<LagResult>& cells, const std::string& a, const std::string& b) {
  for (const auto& r : cells)
    if (r.antecedent.str() == a && r.consequent.str() == b) return r;
  throw std::runtime_error("no cell");
}

LagResult pattern(const std::string& a, const std::string& b, double z) {
  const auto ca = parse_behavior_code(a);
  const auto cb = parse_behavior_code(b);
  return {ca, cb, 1, 0.5, z, interaction_type(ca.actor(), cb.actor())};
}

}  // namespace

TEST_CASE("extract_sequences keeps sessions apart and orders events") {
  SessionLog log = minimal_log();
  log.events = {teacher_event(30, A), teacher_event(10, A), teacher_event(20, B)};
  SessionLog empty = minimal_log("empty");
  const std::vector<SessionLog> logs{log, empty};
  const auto seqs = extract_sequences(logs);
  REQUIRE(seqs.size() == 2);
  REQUIRE(seqs[0].items.size() == 3);
  CHECK(seqs[0].items[0].code.str() == A);
  CHECK(seqs[0].items[1].code.str() == B);
  CHECK(seqs[0].items[2].code.str() == A);
  CHECK(seqs[1].items.empty());
}

TEST_CASE("transition counts for the toy sequence") {
  const auto m = matrix_of({{A, B, A, B, A, B}});
  CHECK(count_of(m, A, B) == 3);
  CHECK(count_of(m, B, A) == 2);
  CHECK(m.total == 5);
}

TEST_CASE("no transition crosses a session boundary") {
  const auto m = matrix_of({{A, B}, {B, A}});
  CHECK(count_of(m, A, B) == 1);
  CHECK(count_of(m, B, A) == 1);
  CHECK(m.total == 2);
}

TEST_CASE("single-event session gives an empty matrix") {
  const auto m = matrix_of({{A}});
  CHECK(m.total == 0);
  CHECK(m.size() == 0);
  CHECK_THROWS_AS(allison_liker_z(m), Error);
}

TEST_CASE("toy adjusted residual") {
  const auto cells = allison_liker_z(matrix_of({{A, B, A, B, A, B}}));
  const auto& ab = cell(cells, A, B);
  CHECK(ab.expected == doctest::Approx(1.8));
  REQUIRE(ab.z.has_value());
  CHECK(*ab.z == doctest::Approx((3.0 - 1.8) / std::sqrt(1.8 * 0.4 * 0.4)).epsilon(1e-12));
  CHECK(std::abs(*ab.z - 2.2360679775) < 1e-9);
  CHECK(ab.itype == InteractionType::TT);
}

TEST_CASE("observed equal to expected gives z of zero") {
  // Rows and columns balanced so every cell has O = E = 1.
  const auto cells = allison_liker_z(matrix_of({{A, A}, {A, B}, {B, A}, {B, B}}));
  for (const auto& r : cells) {
    CHECK(r.expected == doctest::Approx(1.0));
    REQUIRE(r.z.has_value());
    CHECK(*r.z == 0.0);
  }
}

TEST_CASE("zero-variance cells have no z") {
  // Every transition starts from A, so 1 − r/N = 0.
  const auto cells = allison_liker_z(matrix_of({{A, B}, {A, C}}));
  for (const auto& r : cells)
    if (r.antecedent.str() == A) CHECK_FALSE(r.z.has_value());
}

TEST_CASE("brute-force equivalence on random sequences") {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> names{A, B, C, D};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const std::size_t sessions = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    std::vector<std::vector<int>> ints;
    std::vector<std::vector<std::string>> codes;
    for (std::size_t s = 0; s < sessions; ++s) {
      const std::size_t len = std::uniform_int_distribution<std::size_t>(0, 20)(rng);
      std::vector<int> seq;
      std::vector<std::string> named;
      for (std::size_t i = 0; i < len; ++i) {
        const int c = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, k - 1)(rng));
        seq.push_back(c);
        named.push_back(names[static_cast<std::size_t>(c)]);
      }
      ints.push_back(seq);
      codes.push_back(named);
    }
    const auto oracle = enumerate_pairs(ints);
    const auto m = matrix_of(codes);
    std::size_t n = 0;
    for (const auto& [pair, c] : oracle) {
      CHECK(count_of(m, names[pair.first], names[pair.second]) == c);
      n += c;
    }
    CHECK(m.total == n);
    std::size_t row_total = 0;
    std::size_t col_total = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      row_total += m.row_sum(i);
      col_total += m.col_sum(i);
    }
    CHECK(row_total == n);
    CHECK(col_total == n);
    if (n < 2) continue;
    std::map<int, double> rows;
    std::map<int, double> cols;
    for (const auto& [pair, c] : oracle) {
      rows[pair.first] += static_cast<double>(c);
      cols[pair.second] += static_cast<double>(c);
    }
    for (const auto& r : allison_liker_z(m)) {
      const int a = static_cast<int>(std::find(names.begin(), names.end(), r.antecedent.str()) - names.begin());
      const int b = static_cast<int>(std::find(names.begin(), names.end(), r.consequent.str()) - names.begin());
      const auto it = oracle.find({a, b});
      const double observed = it == oracle.end() ? 0.0 : static_cast<double>(it->second);
      CHECK(static_cast<double>(r.observed) == observed);
      const double var_factor = rows[a] * cols[b] * (1.0 - rows[a] / static_cast<double>(n)) *
                                (1.0 - cols[b] / static_cast<double>(n));
      if (var_factor <= 0.0) {
        CHECK_FALSE(r.z.has_value());
      } else {
        REQUIRE(r.z.has_value());
        CHECK(std::abs(*r.z - hand_z(observed, rows[a], cols[b], static_cast<double>(n))) < 1e-12);
      }
    }
  }
}

TEST_CASE("lag-2 counts match enumeration") {
  const std::vector<std::vector<int>> ints{{0, 1, 2, 0, 1, 2, 3}};
  const auto oracle = enumerate_pairs(ints, 2);
  const auto m = matrix_of({{A, B, C, A, B, C, D}}, 2);
  const std::vector<std::string> names{A, B, C, D};
  for (const auto& [pair, c] : oracle) CHECK(count_of(m, names[pair.first], names[pair.second]) == c);
  CHECK(m.total == 5);
  CHECK_THROWS(matrix_of({{A, B}}, 0));
}

TEST_CASE("appending an empty session changes nothing") {
  const auto a = allison_liker_z(matrix_of({{A, B, C, A, B, D, A}}));
  const auto b = allison_liker_z(matrix_of({{A, B, C, A, B, D, A}, {}}));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].observed == b[i].observed);
    CHECK(a[i].z == b[i].z);
  }
}

TEST_CASE("permutation null: a cell is flagged in about 5% of shuffles") {
  // Base sequence drawn independently, then shuffled; shuffles preserve the
  // marginals so |z| >= 1.96 should occur near the nominal 5%.
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> pick(0, 3);
  const std::vector<std::string> names{A, B, C, D};
  std::vector<std::string> seq;
  for (int i = 0; i < 400; ++i) seq.push_back(names[static_cast<std::size_t>(pick(rng))]);
  const int shuffles = 10000;
  int flagged = 0;
  for (int s = 0; s < shuffles; ++s) {
    std::shuffle(seq.begin(), seq.end(), rng);
    const auto cells = allison_liker_z(matrix_of({seq}));
    const auto& ab = cell(cells, A, B);
    if (ab.z && std::abs(*ab.z) >= 1.96) ++flagged;
  }
  const double rate = static_cast<double>(flagged) / shuffles;
  const double sd = std::sqrt(0.05 * 0.95 / shuffles);
  MESSAGE("flag rate " << rate);
  CHECK(std::abs(rate - 0.05) < 4.0 * sd + 0.005);
}

TEST_CASE("significant patterns filter and sort") {
  const std::vector<LagResult> rs{pattern(A, B, 2.5), pattern(A, C, 1.0), pattern(B, C, 3.1)};
  const auto sig = significant_patterns(rs, 1.96);
  REQUIRE(sig.size() == 2);
  CHECK(*sig[0].z == 3.1);
  CHECK(*sig[1].z == 2.5);
  CHECK(significant_patterns({}, 1.96).empty());
}

TEST_CASE("raising the threshold never adds patterns") {
  const auto cells = allison_liker_z(matrix_of({{A, B, A, B, C, D, A, B, C, C, D, A, B, D, D, A}}));
  std::size_t previous = cells.size();
  for (double t = -3.0; t <= 5.0; t += 0.25) {
    const std::size_t now = significant_patterns(cells, t).size();
    CHECK(now <= previous);
    previous = now;
  }
}

TEST_CASE("network keeps edges at or above the cut") {
  const std::vector<LagResult> rs{pattern(A, B, 12), pattern(B, C, 9), pattern(C, D, 15)};
  const auto net = build_network(rs, 10.0);
  CHECK(net.edges.size() == 2);
  for (const auto& e : net.edges) CHECK(*e.z >= 10.0);
  CHECK(net.nodes.size() == 4);

  const auto fan = build_network(std::vector<LagResult>{pattern(A, B, 12), pattern(A, C, 11)}, 10.0);
  CHECK(fan.out_degree(parse_behavior_code(A)) == 2);

  const auto none = build_network(std::vector<LagResult>{pattern(A, B, 3)}, 10.0);
  CHECK(none.edges.empty());
  CHECK(none.nodes.empty());

  const auto loop = build_network(std::vector<LagResult>{pattern(A, A, 20)}, 10.0);
  REQUIRE(loop.edges.size() == 1);
  CHECK(loop.edges[0].antecedent == loop.edges[0].consequent);
  CHECK(loop.nodes.size() == 1);
}

TEST_CASE("breakdown percentages") {
  const std::string s1 = "s_x_low";
  const std::string s2 = "s_y_high";
  const std::vector<LagResult> rs{pattern(A, B, 3), pattern(B, C, 3), pattern(s1, s2, 3), pattern(s1, A, 3)};
  const auto b = type_breakdown(rs);
  CHECK(b.denominator == 4);
  CHECK(b.percentage(InteractionType::TT) == 50.0);
  CHECK(b.percentage(InteractionType::SS) == 25.0);
  CHECK(b.percentage(InteractionType::ST) == 25.0);
  CHECK(format_breakdown_entry(b, InteractionType::TT) == "TT 2 (50.0%)");

  const auto empty = type_breakdown({});
  for (auto t : kAllInteractionTypes) {
    CHECK(empty.count(t) == 0);
    CHECK(empty.percentage(t) == 0.0);
  }

  BreakdownOptions reported;
  reported.policy = DenominatorPolicy::SumOfReportedTypes;
  reported.reported = {true, false, false, true};
  CHECK(type_breakdown(rs, reported).denominator == 3);
}

TEST_CASE("breakdown display with an explicit denominator") {
  const auto b = breakdown_from_counts({69, 0, 16, 110}, 198);
  CHECK(format_percent(b.percentage(InteractionType::TT)) == "34.8%");
  CHECK(format_percent(b.percentage(InteractionType::SS)) == "55.6%");
  CHECK(format_percent(b.percentage(InteractionType::ST)) == "8.1%");
  CHECK(format_breakdown_entry(b, InteractionType::TT) == "TT 69 (34.8%)");

  BreakdownOptions opt;
  opt.policy = DenominatorPolicy::Explicit;
  opt.explicit_denominator = 198;
  std::vector<LagResult> rs;
  for (int i = 0; i < 69; ++i) rs.push_back(pattern(A, B, 3));
  for (int i = 0; i < 110; ++i) rs.push_back(pattern("s_x_low", "s_y_high", 3));
  for (int i = 0; i < 16; ++i) rs.push_back(pattern("s_x_low", A, 3));
  const auto injected = type_breakdown(rs, opt);
  CHECK(injected.percentage(InteractionType::TT) == 34.8);
  CHECK(injected.percentage(InteractionType::SS) == 55.6);
  CHECK(injected.percentage(InteractionType::ST) == 8.1);
}

TEST_CASE("percent rounding is half away from zero at one decimal") {
  CHECK(percent_one_decimal(1, 8) == 12.5);
  CHECK(percent_one_decimal(1, 3) == 33.3);
  CHECK(percent_one_decimal(2, 3) == 66.7);
  CHECK(percent_one_decimal(1, 16) == 6.3);  // 6.25
  CHECK(percent_one_decimal(0, 0) == 0.0);
}

TEST_CASE("z distribution summaries") {
  const std::string s1 = "s_x_low";
  const std::string s2 = "s_y_high";
  std::vector<LagResult> rs;
  for (double z : {1.0, 2.0, 3.0, 4.0, 5.0}) rs.push_back(pattern(s1, s2, z));
  rs.push_back(pattern(A, B, 7.0));
  const auto dist = zscore_distribution(rs);
  REQUIRE(dist.size() == 2);
  CHECK(dist[0].itype == InteractionType::TT);
  CHECK(dist[0].min == 7.0);
  CHECK(dist[0].median == 7.0);
  CHECK(dist[0].max == 7.0);
  CHECK(dist[1].itype == InteractionType::SS);
  CHECK(dist[1].median == 3.0);
  CHECK(dist[1].q1 == 2.0);
  CHECK(dist[1].q3 == 4.0);
  CHECK(dist[1].count == 5);
}

TEST_CASE("quantiles interpolate linearly") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(quantile_sorted(v, 0.5) == 2.5);
  CHECK(quantile_sorted(v, 0.0) == 1.0);
  CHECK(quantile_sorted(v, 1.0) == 4.0);
  CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("lsa export shape") {
  const auto m = matrix_of({{A, B, A, B, A, B}});
  const auto cells = allison_liker_z(m);
  const auto j = lsa_export(m, cells, type_breakdown(cells), build_network(cells, 1.0));
  CHECK(j["vocabulary"] == nlohmann::json::array({A, B}));
  CHECK(j["counts"] == nlohmann::json::parse("[[0,3],[2,0]]"));
  CHECK(j["total_transitions"] == 5);
  CHECK(j["cells"].size() == 4);
}
