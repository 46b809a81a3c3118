#pragma once

// One-vs-rest linear classification and ranking metrics.
//
// Each binary separator minimizes
//     lambda/2 * (|w|^2 + b^2) + 1/n * sum_i max(0, 1 - y_i (w.x_i + b))
// (the bias is regularized like any other weight). Normalizing the loss by
// n makes the optimum invariant to duplicating the training set.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace mdpm {

struct SvmOptions {
  std::vector<double> reg_grid{0.01, 0.1, 1.0, 10.0};
  std::uint32_t folds = 5;
  std::uint64_t seed = 0;
  /// Stop when the projected-gradient spread of the dual falls below this.
  double tolerance = 1e-8;
  std::uint32_t max_epochs = 20000;
  unsigned workers = 1;
};

struct BinarySvm {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double lambda = 0.0;
  std::uint32_t epochs = 0;
};

/// labels are +1 / -1.
BinarySvm train_binary_svm(std::span<const std::vector<double>> x,
                           std::span<const int> labels, double lambda,
                           const SvmOptions& options = {});

double hinge_objective(std::span<const std::vector<double>> x, std::span<const int> labels,
                       const Eigen::VectorXd& weights, double bias, double lambda);

struct LinearModel {
  std::vector<std::int32_t> categories;  // ascending
  std::vector<Eigen::VectorXd> weights;
  std::vector<double> biases;
  std::vector<double> lambdas;

  std::size_t dim() const { return weights.empty() ? 0 : static_cast<std::size_t>(weights[0].size()); }
};

/// Per category: choose lambda from reg_grid by k-fold cross-validated
/// binary accuracy (ties keep the earlier grid entry), then refit on all data.
LinearModel train_ovr(std::span<const std::vector<double>> encodings,
                      std::span<const std::int32_t> labels, const SvmOptions& options = {});

std::vector<double> decision_scores(const LinearModel& model, std::span<const double> x);
/// argmax of decision_scores; ties go to the lowest category id.
std::int32_t predict(const LinearModel& model, std::span<const double> x);

double accuracy(const LinearModel& model, std::span<const std::vector<double>> x,
                std::span<const std::int32_t> labels);

/// All-points interpolated average precision over the descending-score
/// ranking (stable for ties). Throws UndefinedError with no positives.
double average_precision(std::span<const double> scores, std::span<const bool> positives);

struct CategoryAp {
  std::int32_t category = 0;
  double ap = 0.0;
};
/// AP per model category over the given set, plus their mean.
std::vector<CategoryAp> per_category_ap(const LinearModel& model,
                                        std::span<const std::vector<double>> x,
                                        std::span<const std::int32_t> labels);

void write_model(const LinearModel& model, std::ostream& out);
LinearModel read_model(std::istream& in);

}  // namespace mdpm
