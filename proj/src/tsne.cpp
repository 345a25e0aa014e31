#include "tga/tsne.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace tga {

namespace {

constexpr double kEntropyTolerance = 1e-10;
constexpr int kMaxBisectionSteps = 200;
constexpr double kMinGain = 0.01;
constexpr int kTraceEvery = 50;

Matrix squared_distances(const Matrix& points) {
  const std::size_t n = points.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < points.cols(); ++k) {
        const double diff = points(i, k) - points(j, k);
        s += diff * diff;
      }
      d(i, j) = s;
      d(j, i) = s;
    }
  }
  return d;
}

// Fills `row` with p(j|i) for precision beta and returns the entropy in nats.
double gaussian_row(const Matrix& dist, std::size_t i, double beta, double min_dist, std::span<double> row) {
  double sum = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < dist.cols(); ++j) {
    if (j == i) {
      row[j] = 0.0;
      continue;
    }
    const double shifted = dist(i, j) - min_dist;
    row[j] = std::exp(-beta * shifted);
    sum += row[j];
    weighted += shifted * row[j];
  }
  for (double& p : row) p /= sum;
  return std::log(sum) + beta * weighted / sum;
}

void check_input(const Matrix& points, double perplexity) {
  const std::size_t n = points.rows();
  if (n < 4) throw Error(ErrorCode::TooFewPoints, std::to_string(n) + " points, need at least 4");
  if (!(perplexity > 0.0)) throw Error(ErrorCode::MalformedConfig, "perplexity must be > 0");
  const double limit = static_cast<double>(n - 1) / 3.0;
  if (perplexity >= limit)
    throw Error(ErrorCode::PerplexityTooLarge, "perplexity " + std::to_string(perplexity) + " must be < (n-1)/3 = " +
                                                   std::to_string(limit) + " for n = " + std::to_string(n));
}

}  // namespace

double Matrix::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

void check_config(const TsneConfig& cfg) {
  auto bad = [](const char* what) { throw Error(ErrorCode::MalformedConfig, what); };
  if (!(cfg.perplexity > 0.0)) bad("perplexity must be > 0");
  if (cfg.iterations <= 0) bad("iterations must be > 0");
  if (!(cfg.learning_rate > 0.0)) bad("learning_rate must be > 0");
  if (!(cfg.early_exaggeration_factor >= 1.0)) bad("early_exaggeration_factor must be >= 1");
  if (cfg.early_exaggeration_iters < 0) bad("early_exaggeration_iters must be >= 0");
  if (!(cfg.momentum_initial >= 0.0 && cfg.momentum_initial < 1.0)) bad("momentum_initial must be in [0, 1)");
  if (!(cfg.momentum_final >= 0.0 && cfg.momentum_final < 1.0)) bad("momentum_final must be in [0, 1)");
}

Matrix conditional_probabilities(const Matrix& points, double perplexity) {
  check_input(points, perplexity);
  const std::size_t n = points.rows();
  const Matrix dist = squared_distances(points);
  const double target = std::log(perplexity);
  Matrix cond(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) min_dist = std::min(min_dist, dist(i, j));

    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    auto row = cond.row(i);
    for (int step = 0; step < kMaxBisectionSteps; ++step) {
      const double entropy = gaussian_row(dist, i, beta, min_dist, row);
      const double diff = entropy - target;
      if (std::abs(diff) < kEntropyTolerance) break;
      if (diff > 0.0) {
        // too flat: sharpen
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
  }
  return cond;
}

Matrix joint_probabilities(const Matrix& points, double perplexity) {
  const Matrix cond = conditional_probabilities(points, perplexity);
  const std::size_t n = cond.rows();
  Matrix joint(n, n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = (cond(i, j) + cond(j, i)) * scale;
      joint(i, j) = p;
      joint(j, i) = p;
    }
  }
  return joint;
}

namespace {

// Unnormalized kernel 1 / (1 + |y_i − y_j|²), zero diagonal; returns its sum.
double student_t_kernel(const Matrix& layout, Matrix& kernel) {
  const std::size_t n = layout.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    kernel(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < layout.cols(); ++k) {
        const double diff = layout(i, k) - layout(j, k);
        d2 += diff * diff;
      }
      const double w = 1.0 / (1.0 + d2);
      kernel(i, j) = w;
      kernel(j, i) = w;
      total += 2.0 * w;
    }
  }
  return total;
}

double kl_with_kernel(const Matrix& joint, const Matrix& kernel, double kernel_sum) {
  const std::size_t n = joint.rows();
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double p = joint(i, j);
      if (i == j || p <= 0.0) continue;
      kl += p * std::log(p * kernel_sum / kernel(i, j));
    }
  }
  return kl;
}

void gradient_with_kernel(const Matrix& joint, double p_scale, const Matrix& layout, const Matrix& kernel,
                          double kernel_sum, Matrix& grad) {
  const std::size_t n = layout.rows();
  const std::size_t dims = layout.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dims; ++k) grad(i, k) = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = kernel(i, j);
      const double coeff = 4.0 * (p_scale * joint(i, j) - w / kernel_sum) * w;
      for (std::size_t k = 0; k < dims; ++k) grad(i, k) += coeff * (layout(i, k) - layout(j, k));
    }
  }
}

}  // namespace

Matrix student_t_affinities(const Matrix& layout) {
  Matrix kernel(layout.rows(), layout.rows());
  const double total = student_t_kernel(layout, kernel);
  Matrix q(layout.rows(), layout.rows());
  for (std::size_t i = 0; i < layout.rows(); ++i)
    for (std::size_t j = 0; j < layout.rows(); ++j) q(i, j) = kernel(i, j) / total;
  return q;
}

double kl_divergence(const Matrix& joint, const Matrix& layout) {
  Matrix kernel(layout.rows(), layout.rows());
  const double total = student_t_kernel(layout, kernel);
  return kl_with_kernel(joint, kernel, total);
}

Matrix kl_gradient(const Matrix& joint, const Matrix& layout) {
  Matrix kernel(layout.rows(), layout.rows());
  const double total = student_t_kernel(layout, kernel);
  Matrix grad(layout.rows(), layout.cols());
  gradient_with_kernel(joint, 1.0, layout, kernel, total, grad);
  return grad;
}

TsneRun run_tsne(const Matrix& points, const TsneConfig& cfg) {
  check_config(cfg);
  const Matrix joint = joint_probabilities(points, cfg.perplexity);
  const std::size_t n = points.rows();
  constexpr std::size_t kDims = 2;

  TsneRun run;
  run.layout = Matrix(n, kDims);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, 1e-2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < kDims; ++k) run.layout(i, k) = init(rng);
  run.initial_layout = run.layout;

  Matrix kernel(n, n);
  Matrix grad(n, kDims);
  Matrix update(n, kDims);
  Matrix gains(n, kDims, 1.0);

  double kernel_sum = student_t_kernel(run.layout, kernel);
  run.kl_initial = kl_with_kernel(joint, kernel, kernel_sum);
  run.kl_trace.emplace_back(0, run.kl_initial);

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const double exaggeration = iter < cfg.early_exaggeration_iters ? cfg.early_exaggeration_factor : 1.0;
    const double momentum = iter < cfg.momentum_switch_iter ? cfg.momentum_initial : cfg.momentum_final;
    gradient_with_kernel(joint, exaggeration, run.layout, kernel, kernel_sum, grad);

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < kDims; ++k) {
        double& gain = gains(i, k);
        const bool same_sign = (grad(i, k) > 0.0) == (update(i, k) > 0.0);
        gain = same_sign ? gain * 0.8 : gain + 0.2;
        if (gain < kMinGain) gain = kMinGain;
        update(i, k) = momentum * update(i, k) - cfg.learning_rate * gain * grad(i, k);
        run.layout(i, k) += update(i, k);
      }
    }
    for (std::size_t k = 0; k < kDims; ++k) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += run.layout(i, k);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) run.layout(i, k) -= mean;
    }

    kernel_sum = student_t_kernel(run.layout, kernel);
    if ((iter + 1) % kTraceEvery == 0 || iter + 1 == cfg.iterations)
      run.kl_trace.emplace_back(iter + 1, kl_with_kernel(joint, kernel, kernel_sum));
  }
  run.kl_final = run.kl_trace.back().second;
  return run;
}

Projection2D tsne_project(std::span<const EmbeddedUtterance> inputs, const TsneConfig& cfg) {
  if (inputs.size() < 4) throw Error(ErrorCode::TooFewPoints, std::to_string(inputs.size()) + " points, need at least 4");
  const std::size_t dim = inputs.front().vector.size();
  Matrix points(inputs.size(), dim);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].vector.size() != dim)
      throw Error(ErrorCode::DimensionMismatch, "point " + std::to_string(i) + " has " +
                                                    std::to_string(inputs[i].vector.size()) + " components, expected " +
                                                    std::to_string(dim));
    for (std::size_t k = 0; k < dim; ++k) points(i, k) = inputs[i].vector[k];
  }
  const TsneRun run = run_tsne(points, cfg);
  Projection2D projection;
  projection.kl_initial = run.kl_initial;
  projection.kl_final = run.kl_final;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    projection.points.push_back({inputs[i].session_index, inputs[i].utterance_index, run.layout(i, 0),
                                 run.layout(i, 1), inputs[i].level, inputs[i].actor});
  }
  return projection;
}

Projection2D tsne_project(const EmbeddingSidecar& embeddings, const SessionLog& log, const TsneConfig& cfg) {
  std::vector<EmbeddedUtterance> inputs;
  for (const auto& entry : embeddings.entries) {
    if (entry.utterance_index >= log.utterances.size())
      throw Error(ErrorCode::IndexOutOfRange, "utterance_index " + std::to_string(entry.utterance_index));
    if (entry.vector.size() != embeddings.dim)
      throw Error(ErrorCode::DimensionMismatch, "utterance_index " + std::to_string(entry.utterance_index));
    const auto& u = log.utterances[entry.utterance_index];
    inputs.push_back({0, entry.utterance_index, u.level, u.actor.kind, entry.vector});
  }
  return tsne_project(inputs, cfg);
}

nlohmann::json to_json(const Projection2D& projection) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : projection.points) {
    points.push_back({{"session_index", p.session_index},
                      {"utterance_index", p.utterance_index},
                      {"x", p.x},
                      {"y", p.y},
                      {"level", std::string(to_string(p.level))},
                      {"actor", std::string(to_string(p.actor))}});
  }
  return {{"points", std::move(points)}, {"kl_initial", projection.kl_initial}, {"kl_final", projection.kl_final}};
}

}  // namespace tga
