#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "incident/classifiers.hpp"
#include "incident/errors.hpp"
#include "incident/rng.hpp"

namespace incident {

namespace {

std::vector<std::string> column_names(const Dataset& data) {
  std::vector<std::string> names;
  for (const auto& col : data.schema().columns()) names.push_back(col.name);
  return names;
}

void require_both_classes(const Dataset& data, std::string_view trainer) {
  auto counts = class_counts(data);
  if (counts.positives == 0 || counts.negatives == 0) {
    throw DegenerateClassError(std::string(trainer) + " needs both classes in the training data (" +
                               std::to_string(counts.positives) + " positives, " +
                               std::to_string(counts.negatives) + " negatives)");
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

struct LogRegState {
  double objective = 0.0;
  Eigen::VectorXd gradient;  // weights then intercept
};

// Evaluates objective and gradient at theta = (w, b); fills `probability`.
LogRegState logreg_state(const ConstRowMap& x, const Eigen::VectorXd& y, const Eigen::VectorXd& theta,
                         double lambda, Eigen::VectorXd& probability) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd z = x * theta.head(d);
  z.array() += theta(d);
  probability.resize(n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    loss += softplus(z(i)) - y(i) * z(i);
    probability(i) = sigmoid(z(i));
  }
  Eigen::VectorXd residual = probability - y;
  LogRegState state;
  state.objective = loss * inv_n + 0.5 * lambda * inv_n * theta.head(d).squaredNorm();
  state.gradient.resize(d + 1);
  state.gradient.head(d) = (x.transpose() * residual) * inv_n + lambda * inv_n * theta.head(d);
  state.gradient(d) = residual.sum() * inv_n;
  return state;
}

double logreg_objective_only(const ConstRowMap& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& theta, double lambda) {
  const Eigen::Index d = x.cols();
  Eigen::VectorXd z = x * theta.head(d);
  z.array() += theta(d);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) loss += softplus(z(i)) - y(i) * z(i);
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  return loss * inv_n + 0.5 * lambda * inv_n * theta.head(d).squaredNorm();
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear SVM

TrainedModel train_svm_linear(const Dataset& train, const Hyperparams& hp, std::uint64_t seed) {
  hp.validate();
  require_both_classes(train, "linear SVM");
  const std::size_t n = train.rows();
  const std::size_t d = train.width();
  const double lambda = hp.svm.lambda.value_or(1.0 / static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);

  // w = scale * v keeps the (1 - 1/t) shrink O(1) per step.
  std::vector<double> v(d, 0.0);
  double scale = 1.0;
  double norm_sq = 0.0;  // |v|^2
  double intercept = 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::uint64_t t = 0;
  for (std::size_t epoch = 0; epoch < hp.svm.epochs; ++epoch) {
    shuffle(order, rng);
    norm_sq = 0.0;
    for (double vj : v) norm_sq += vj * vj;
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = train.label(i) ? 1.0 : -1.0;
      auto x = train.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += v[j] * x[j];
      const double margin = y * (scale * dot + intercept);

      // eta * lambda == 1/t, so the first step resets w exactly.
      const double shrink = 1.0 - 1.0 / static_cast<double>(t);
      if (shrink == 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
        norm_sq = 0.0;
        dot = 0.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        const double step = eta * y / scale;
        double x_sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          v[j] += step * x[j];
          x_sq += x[j] * x[j];
        }
        norm_sq += 2.0 * step * dot + step * step * x_sq;
        intercept += eta * y;
      }
      const double w_norm = scale * std::sqrt(std::max(norm_sq, 0.0));
      if (w_norm > radius) scale *= radius / w_norm;
      if (scale < 1e-100) {
        for (double& vj : v) vj *= scale;
        norm_sq *= scale * scale;
        scale = 1.0;
      }
    }
  }

  LinearParams params;
  params.weights.resize(d);
  for (std::size_t j = 0; j < d; ++j) params.weights[j] = scale * v[j];
  params.intercept = intercept;
  Hyperparams resolved = hp;
  resolved.svm.lambda = lambda;
  return TrainedModel(Algorithm::Svm, resolved, train.schema().fingerprint(), column_names(train),
                      std::move(params));
}

double svm_objective(const Dataset& data, const LinearParams& params, double lambda) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double y = data.label(i) ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * params.score(data.row(i)));
  }
  double norm_sq = 0.0;
  for (double w : params.weights) norm_sq += w * w;
  return 0.5 * lambda * norm_sq + hinge / static_cast<double>(data.rows());
}

// ---------------------------------------------------------------------------
// Logistic regression

TrainedModel train_logreg(const Dataset& train, const Hyperparams& hp) {
  hp.validate();
  require_both_classes(train, "logistic regression");
  const auto n = static_cast<Eigen::Index>(train.rows());
  const auto d = static_cast<Eigen::Index>(train.width());
  const double lambda = hp.logreg.lambda;
  ConstRowMap x(train.values().data(), n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = train.label(static_cast<std::size_t>(i));

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd probability;
  LogRegState state = logreg_state(x, y, theta, lambda, probability);
  const double inv_n = 1.0 / static_cast<double>(n);
  constexpr Eigen::Index kBlock = 4096;

  std::size_t iteration = 0;
  while (state.gradient.norm() > hp.logreg.tolerance) {
    if (iteration == hp.logreg.max_iterations) {
      throw ConvergenceError("logistic regression did not converge in " +
                                 std::to_string(iteration) + " iterations (gradient norm " +
                                 std::to_string(state.gradient.norm()) + ")",
                             state.gradient.norm());
    }
    ++iteration;

    // Hessian of the mean loss, accumulated over row blocks of [x, 1].
    Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(d + 1, d + 1);
    for (Eigen::Index start = 0; start < n; start += kBlock) {
      Eigen::Index rows = std::min(kBlock, n - start);
      Eigen::MatrixXd block(rows, d + 1);
      for (Eigen::Index r = 0; r < rows; ++r) {
        double p = probability(start + r);
        double s = std::sqrt(p * (1.0 - p));
        block.row(r).head(d) = x.row(start + r) * s;
        block(r, d) = s;
      }
      hessian.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    }
    hessian = hessian.selfadjointView<Eigen::Lower>();
    hessian *= inv_n;
    hessian.diagonal().head(d).array() += lambda * inv_n;

    Eigen::LDLT<Eigen::MatrixXd> solver(hessian);
    Eigen::VectorXd direction = -solver.solve(state.gradient);
    double slope = state.gradient.dot(direction);
    if (!direction.allFinite() || slope >= 0.0) {
      direction = -state.gradient;
      slope = -state.gradient.squaredNorm();
    }

    // Armijo backtracking. Near the optimum the predicted decrease drops
    // below the rounding error of the summed objective, so changes within
    // that noise count as no increase.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(state.objective));
    double step = 1.0;
    Eigen::VectorXd candidate = theta + direction;
    double objective = logreg_objective_only(x, y, candidate, lambda);
    while (objective > state.objective + 1e-4 * step * slope + noise && step > 1e-12) {
      step *= 0.5;
      candidate = theta + step * direction;
      objective = logreg_objective_only(x, y, candidate, lambda);
    }
    if (objective > state.objective + noise) break;
    Eigen::VectorXd next_probability;
    LogRegState next = logreg_state(x, y, candidate, lambda, next_probability);
    if (next.gradient.norm() >= state.gradient.norm() && objective >= state.objective) break;
    theta = candidate;
    state = std::move(next);
    probability = std::move(next_probability);
  }
  if (state.gradient.norm() > hp.logreg.tolerance) {
    throw ConvergenceError("logistic regression stalled with gradient norm " +
                               std::to_string(state.gradient.norm()),
                           state.gradient.norm());
  }

  LinearParams params;
  params.weights.assign(theta.data(), theta.data() + d);
  params.intercept = theta(d);
  return TrainedModel(Algorithm::LogReg, hp, train.schema().fingerprint(), column_names(train),
                      std::move(params));
}

double logreg_objective(const Dataset& data, const LinearParams& params, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double z = params.score(data.row(i));
    loss += softplus(z) - (data.label(i) ? z : 0.0);
  }
  double norm_sq = 0.0;
  for (double w : params.weights) norm_sq += w * w;
  const double inv_n = 1.0 / static_cast<double>(data.rows());
  return loss * inv_n + 0.5 * lambda * inv_n * norm_sq;
}

std::vector<double> logreg_gradient(const Dataset& data, const LinearParams& params, double lambda) {
  const std::size_t d = data.width();
  std::vector<double> grad(d + 1, 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    auto x = data.row(i);
    double r = sigmoid(params.score(x)) - data.label(i);
    for (std::size_t j = 0; j < d; ++j) grad[j] += r * x[j];
    grad[d] += r;
  }
  const double inv_n = 1.0 / static_cast<double>(data.rows());
  for (std::size_t j = 0; j < d; ++j) grad[j] = grad[j] * inv_n + lambda * inv_n * params.weights[j];
  grad[d] *= inv_n;
  return grad;
}

}  // namespace incident
