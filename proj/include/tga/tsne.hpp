#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "tga/ingest.hpp"
#include "tga/session_model.hpp"

namespace tga {

// Row-major dense matrix, just enough for the exact t-SNE.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }
  double sum() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration_factor = 12.0;
  int early_exaggeration_iters = 250;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  int momentum_switch_iter = 250;
  std::uint64_t seed = 0;
};

// Throws MalformedConfig for out-of-domain values.
void check_config(const TsneConfig& cfg);

// Row i holds p(j|i); each row's Gaussian bandwidth is bisected until its
// Shannon entropy (nats) equals log(perplexity).
Matrix conditional_probabilities(const Matrix& points, double perplexity);

// Symmetrized joint affinities (p(j|i) + p(i|j)) / 2n; sums to one.
Matrix joint_probabilities(const Matrix& points, double perplexity);

// Student-t (one degree of freedom) affinities of a layout; sums to one.
Matrix student_t_affinities(const Matrix& layout);

// KL(P || Q(layout)), terms with p = 0 contribute nothing.
double kl_divergence(const Matrix& joint, const Matrix& layout);

// dKL/dy_i = 4 Σ_j (p_ij − q_ij)(y_i − y_j) / (1 + |y_i − y_j|²)
Matrix kl_gradient(const Matrix& joint, const Matrix& layout);

struct TsneRun {
  Matrix layout;  // n × 2
  Matrix initial_layout;
  double kl_initial = 0.0;
  double kl_final = 0.0;
  // (iteration, KL without exaggeration), every 50 iterations and at the end.
  std::vector<std::pair<int, double>> kl_trace;
};

// Exact O(n²) t-SNE to two dimensions. Throws TooFewPoints (n < 4),
// PerplexityTooLarge (perplexity ≥ (n − 1)/3).
TsneRun run_tsne(const Matrix& points, const TsneConfig& cfg);

struct EmbeddedUtterance {
  std::size_t session_index = 0;
  std::size_t utterance_index = 0;
  CognitiveLevel level = CognitiveLevel::Unclassified;
  ActorKind actor = ActorKind::Teacher;
  std::vector<double> vector;
};

struct ProjectedPoint {
  std::size_t session_index = 0;
  std::size_t utterance_index = 0;
  double x = 0.0;
  double y = 0.0;
  CognitiveLevel level = CognitiveLevel::Unclassified;
  ActorKind actor = ActorKind::Teacher;
};

struct Projection2D {
  std::vector<ProjectedPoint> points;
  double kl_initial = 0.0;
  double kl_final = 0.0;
};

// Throws DimensionMismatch when vectors disagree in length.
Projection2D tsne_project(std::span<const EmbeddedUtterance> inputs, const TsneConfig& cfg);

// Single-session form: labels and actors come from the log's utterances.
// Throws IndexOutOfRange for entries past the end of the log.
Projection2D tsne_project(const EmbeddingSidecar& embeddings, const SessionLog& log, const TsneConfig& cfg);

nlohmann::json to_json(const Projection2D& projection);

}  // namespace tga
