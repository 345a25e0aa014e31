#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tga/error.hpp"
#include "tga/ingest.hpp"
#include "tga/tsne.hpp"

using namespace tga;

namespace {

Matrix random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) m(i, d) = g(rng);
  return m;
}

// Three well-separated clusters in 5-D.
Matrix clustered_points(std::size_t per_cluster, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  Matrix m(3 * per_cluster, 5);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < per_cluster; ++i)
      for (std::size_t d = 0; d < 5; ++d) m(c * per_cluster + i, d) = g(rng) + (d == c ? 6.0 : 0.0);
  return m;
}

TsneConfig short_config(double perplexity, std::uint64_t seed) {
  TsneConfig cfg;
  cfg.perplexity = perplexity;
  cfg.iterations = 300;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("conditional rows hit the target entropy") {
  const Matrix x = random_points(30, 4, 1);
  const double perplexity = 5.0;
  const Matrix p = conditional_probabilities(x, perplexity);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    double h = 0.0;
    for (std::size_t j = 0; j < p.cols(); ++j) {
      sum += p(i, j);
      if (p(i, j) > 0.0) h -= p(i, j) * std::log(p(i, j));
    }
    CHECK(p(i, i) == 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h == doctest::Approx(std::log(perplexity)).epsilon(1e-6));
  }
}

TEST_CASE("joint P and Student-t Q are probability distributions") {
  const Matrix x = random_points(25, 6, 2);
  const Matrix p = joint_probabilities(x, 6.0);
  const Matrix q = student_t_affinities(random_points(25, 2, 3));
  CHECK(std::abs(p.sum() - 1.0) < 1e-9);
  CHECK(std::abs(q.sum() - 1.0) < 1e-9);
  for (std::size_t i = 0; i < 25; ++i) {
    for (std::size_t j = 0; j < 25; ++j) {
      CHECK(p(i, j) >= 0.0);
      CHECK(q(i, j) >= 0.0);
      CHECK(p(i, j) == p(j, i));
      CHECK(q(i, j) == doctest::Approx(q(j, i)).epsilon(1e-15));
    }
    CHECK(q(i, i) == 0.0);
  }
}

TEST_CASE("analytic gradient matches central differences") {
  const Matrix x = random_points(10, 5, 4);
  const Matrix p = joint_probabilities(x, 2.5);
  Matrix y = random_points(10, 2, 5);
  const Matrix grad = kl_gradient(p, y);
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t d = 0; d < 2; ++d) {
      const double keep = y(i, d);
      y(i, d) = keep + h;
      const double up = kl_divergence(p, y);
      y(i, d) = keep - h;
      const double down = kl_divergence(p, y);
      y(i, d) = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double rel = std::abs(grad(i, d) - numeric) / std::max(std::abs(numeric), 1e-8);
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("kl_initial is unchanged by translating the layout") {
  const Matrix x = random_points(12, 3, 6);
  const Matrix p = joint_probabilities(x, 3.0);
  Matrix y = random_points(12, 2, 7);
  const double before = kl_divergence(p, y);
  for (std::size_t i = 0; i < 12; ++i) {
    y(i, 0) += 3.5;
    y(i, 1) -= 1.25;
  }
  CHECK(kl_divergence(p, y) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("optimization lowers KL and is reproducible") {
  const Matrix x = random_points(10, 4, 8);
  const TsneConfig cfg = short_config(2.0, 42);
  const TsneRun a = run_tsne(x, cfg);
  const TsneRun b = run_tsne(x, cfg);
  CHECK(a.kl_final <= a.kl_initial);
  CHECK(a.layout.data() == b.layout.data());
  CHECK(a.kl_final == b.kl_final);
  REQUIRE_FALSE(a.kl_trace.empty());
  CHECK(a.kl_trace.back().first == cfg.iterations);
  CHECK(a.kl_trace.back().second == doctest::Approx(a.kl_final));
  const TsneRun other = run_tsne(x, short_config(2.0, 43));
  CHECK(other.layout.data() != a.layout.data());
}

TEST_CASE("clusters stay separated in the layout") {
  const Matrix x = clustered_points(15, 9);
  TsneConfig cfg;
  cfg.perplexity = 8.0;
  cfg.seed = 1;
  const TsneRun run = run_tsne(x, cfg);
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::hypot(run.layout(a, 0) - run.layout(b, 0), run.layout(a, 1) - run.layout(b, 1));
  };
  double within = 0.0;
  double between = 0.0;
  std::size_t nw = 0;
  std::size_t nb = 0;
  for (std::size_t a = 0; a < 45; ++a)
    for (std::size_t b = a + 1; b < 45; ++b) {
      if (a / 15 == b / 15) {
        within += dist(a, b);
        ++nw;
      } else {
        between += dist(a, b);
        ++nb;
      }
    }
  CHECK(between / static_cast<double>(nb) > 3.0 * within / static_cast<double>(nw));
}

TEST_CASE("input checks") {
  CHECK_THROWS_AS(run_tsne(random_points(3, 2, 1), short_config(0.5, 0)), Error);
  try {
    run_tsne(random_points(10, 2, 1), short_config(3.0, 0));
    FAIL("expected PerplexityTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PerplexityTooLarge);
  }
  try {
    run_tsne(random_points(3, 2, 1), short_config(0.5, 0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewPoints);
  }
  TsneConfig bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(check_config(bad), Error);
  bad = {};
  bad.early_exaggeration_factor = 0.5;
  CHECK_THROWS_AS(check_config(bad), Error);
  bad = {};
  bad.momentum_final = 1.0;
  CHECK_THROWS_AS(check_config(bad), Error);
}

TEST_CASE("projection keeps utterance identity and checks dimensions") {
  std::vector<EmbeddedUtterance> inputs;
  const Matrix x = random_points(12, 3, 10);
  for (std::size_t i = 0; i < 12; ++i)
    inputs.push_back({i % 2, i, CognitiveLevel::Applying, ActorKind::Teacher, {x(i, 0), x(i, 1), x(i, 2)}});
  const auto proj = tsne_project(inputs, short_config(2.0, 1));
  REQUIRE(proj.points.size() == 12);
  CHECK(proj.points[5].utterance_index == 5);
  CHECK(proj.points[5].session_index == 1);
  inputs[3].vector.push_back(1.0);
  try {
    tsne_project(inputs, short_config(2.0, 1));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("duplicated inputs get identical affinity rows") {
  // Two duplicated points receive identical P rows, so their gradients
  // coincide whenever their layout positions do.
  Matrix x = random_points(8, 3, 11);
  for (std::size_t d = 0; d < 3; ++d) x(1, d) = x(0, d);
  const Matrix p = joint_probabilities(x, 2.0);
  for (std::size_t j = 2; j < 8; ++j) CHECK(p(0, j) == doctest::Approx(p(1, j)).epsilon(1e-12));
}
