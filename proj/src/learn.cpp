#include "mdpm/learn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "mdpm/error.hpp"
#include "mdpm/io.hpp"
#include "parallel.hpp"

namespace mdpm {

namespace {

// Fisher-Yates over the raw engine output, so the order does not depend on
// the standard library's distribution implementations.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

double dot_aug(const Eigen::VectorXd& w, double b, const std::vector<double>& x) {
  double s = b;
  for (std::size_t j = 0; j < x.size(); ++j) s += w[static_cast<Eigen::Index>(j)] * x[j];
  return s;
}

}  // namespace

BinarySvm train_binary_svm(std::span<const std::vector<double>> x,
                           std::span<const int> labels, double lambda,
                           const SvmOptions& options) {
  if (x.empty()) throw EmptyInputError("SVM training set is empty");
  if (x.size() != labels.size()) throw ValidationError("encodings and labels differ in count");
  if (!(lambda > 0.0)) throw ValidationError("regularization must be positive");
  const std::size_t n = x.size();
  const std::size_t dim = x[0].size();
  for (const auto& v : x) {
    if (v.size() != dim) throw ValidationError("encodings differ in length");
  }

  // Dual coordinate descent on the bias-augmented problem with C = 1/(lambda n).
  const double c = 1.0 / (lambda * static_cast<double>(n));
  std::vector<double> alpha(n, 0.0), qii(n);
  for (std::size_t i = 0; i < n; ++i) {
    qii[i] = 1.0 + std::inner_product(x[i].begin(), x[i].end(), x[i].begin(), 0.0);
  }
  BinarySvm model;
  model.lambda = lambda;
  model.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  double& b = model.bias;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(options.seed);

  for (std::uint32_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    shuffle_indices(order, rng);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (auto i : order) {
      const double y = labels[i];
      const double g = y * dot_aug(model.weights, b, x[i]) - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] == c) {
        pg = std::max(g, 0.0);
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / qii[i], 0.0, c);
      const double delta = (alpha[i] - old) * y;
      if (delta == 0.0) continue;
      for (std::size_t j = 0; j < dim; ++j) model.weights[static_cast<Eigen::Index>(j)] += delta * x[i][j];
      b += delta;
    }
    model.epochs = epoch + 1;
    if (pg_max - pg_min <= options.tolerance) break;
  }
  return model;
}

double hinge_objective(std::span<const std::vector<double>> x, std::span<const int> labels,
                       const Eigen::VectorXd& weights, double bias, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    loss += std::max(0.0, 1.0 - labels[i] * dot_aug(weights, bias, x[i]));
  }
  return 0.5 * lambda * (weights.squaredNorm() + bias * bias) +
         loss / static_cast<double>(x.size());
}

LinearModel train_ovr(std::span<const std::vector<double>> encodings,
                      std::span<const std::int32_t> labels, const SvmOptions& options) {
  if (encodings.size() != labels.size()) {
    throw ValidationError("encodings and labels differ in count");
  }
  if (options.folds < 2) throw ValidationError("folds must be >= 2");
  if (options.reg_grid.empty()) throw ValidationError("regularization grid is empty");
  std::vector<std::int32_t> cats(labels.begin(), labels.end());
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  if (cats.size() < 2) throw ValidationError("one-vs-rest training needs at least 2 categories");

  const std::size_t n = encodings.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(options.seed);
  shuffle_indices(perm, rng);
  std::vector<std::uint32_t> fold(n);
  for (std::size_t r = 0; r < n; ++r) fold[perm[r]] = static_cast<std::uint32_t>(r % options.folds);

  LinearModel model;
  model.categories = cats;
  model.weights.resize(cats.size());
  model.biases.resize(cats.size());
  model.lambdas.resize(cats.size());

  detail::parallel_chunks(cats.size(), options.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t ci = begin; ci < end; ++ci) {
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == cats[ci] ? 1 : -1;

      double best_acc = -1.0;
      double best_lambda = options.reg_grid.front();
      for (double lambda : options.reg_grid) {
        std::size_t correct = 0;
        for (std::uint32_t f = 0; f < options.folds; ++f) {
          std::vector<std::vector<double>> tx;
          std::vector<int> ty;
          for (std::size_t i = 0; i < n; ++i) {
            if (fold[i] != f) {
              tx.push_back(encodings[i]);
              ty.push_back(y[i]);
            }
          }
          if (tx.empty()) continue;
          const auto svm = train_binary_svm(tx, ty, lambda, options);
          for (std::size_t i = 0; i < n; ++i) {
            if (fold[i] != f) continue;
            const double s = dot_aug(svm.weights, svm.bias, encodings[i]);
            correct += (s > 0.0 ? 1 : -1) == y[i] ? 1 : 0;
          }
        }
        const double acc = static_cast<double>(correct) / static_cast<double>(n);
        if (acc > best_acc) {
          best_acc = acc;
          best_lambda = lambda;
        }
      }
      const auto svm = train_binary_svm(encodings, y, best_lambda, options);
      model.weights[ci] = svm.weights;
      model.biases[ci] = svm.bias;
      model.lambdas[ci] = best_lambda;
    }
  });
  return model;
}

std::vector<double> decision_scores(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) throw ValidationError("encoding length does not match the model");
  std::vector<double> out(model.categories.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    double s = model.biases[c];
    for (std::size_t j = 0; j < x.size(); ++j) s += model.weights[c][static_cast<Eigen::Index>(j)] * x[j];
    out[c] = s;
  }
  return out;
}

std::int32_t predict(const LinearModel& model, std::span<const double> x) {
  const auto s = decision_scores(model, x);
  const auto best = std::max_element(s.begin(), s.end()) - s.begin();
  return model.categories[static_cast<std::size_t>(best)];
}

double accuracy(const LinearModel& model, std::span<const std::vector<double>> x,
                std::span<const std::int32_t> labels) {
  if (x.empty()) throw EmptyInputError("accuracy of an empty set is undefined");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) correct += predict(model, x[i]) == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(x.size());
}

double average_precision(std::span<const double> scores, std::span<const bool> positives) {
  if (scores.size() != positives.size()) throw ValidationError("scores and labels differ in count");
  const auto total_pos = static_cast<std::size_t>(std::count(positives.begin(), positives.end(), true));
  if (total_pos == 0) throw UndefinedError("average precision needs at least one positive");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<double> precision(order.size());
  std::size_t tp = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    tp += positives[order[r]] ? 1 : 0;
    precision[r] = static_cast<double>(tp) / static_cast<double>(r + 1);
  }
  // Interpolated precision: best precision at this rank or deeper.
  for (std::size_t r = order.size() - 1; r-- > 0;) precision[r] = std::max(precision[r], precision[r + 1]);
  double ap = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (positives[order[r]]) ap += precision[r];
  }
  return ap / static_cast<double>(total_pos);
}

std::vector<CategoryAp> per_category_ap(const LinearModel& model,
                                        std::span<const std::vector<double>> x,
                                        std::span<const std::int32_t> labels) {
  std::vector<std::vector<double>> scores(model.categories.size());
  for (const auto& v : x) {
    const auto s = decision_scores(model, v);
    for (std::size_t c = 0; c < s.size(); ++c) scores[c].push_back(s[c]);
  }
  std::vector<CategoryAp> out;
  for (std::size_t c = 0; c < model.categories.size(); ++c) {
    auto pos = std::make_unique<bool[]>(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) pos[i] = labels[i] == model.categories[c];
    out.push_back({model.categories[c],
                   average_precision(scores[c], std::span<const bool>(pos.get(), labels.size()))});
  }
  return out;
}

void write_model(const LinearModel& model, std::ostream& out) {
  out << "mdpm-linear-model 1\n";
  out << "dim " << model.dim() << " categories " << model.categories.size() << "\n";
  for (std::size_t c = 0; c < model.categories.size(); ++c) {
    out << "category " << model.categories[c] << " lambda " << format_real(model.lambdas[c])
        << " bias " << format_real(model.biases[c]) << "\nw";
    for (Eigen::Index j = 0; j < model.weights[c].size(); ++j) out << ' ' << format_real(model.weights[c][j]);
    out << '\n';
  }
}

LinearModel read_model(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "mdpm-linear-model" || version != 1) {
    throw FormatError("not an mdpm linear model file");
  }
  std::size_t dim = 0, count = 0;
  std::string t1, t2;
  if (!(in >> t1 >> dim >> t2 >> count) || t1 != "dim" || t2 != "categories") {
    throw FormatError("malformed model header");
  }
  LinearModel model;
  for (std::size_t c = 0; c < count; ++c) {
    std::string kc, kl, kb, kw;
    std::int32_t cat = 0;
    double lambda = 0.0, bias = 0.0;
    if (!(in >> kc >> cat >> kl >> lambda >> kb >> bias >> kw) || kc != "category" ||
        kl != "lambda" || kb != "bias" || kw != "w") {
      throw FormatError("malformed model entry " + std::to_string(c));
    }
    Eigen::VectorXd w(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      if (!(in >> w[static_cast<Eigen::Index>(j)])) throw FormatError("model weights truncated");
    }
    model.categories.push_back(cat);
    model.lambdas.push_back(lambda);
    model.biases.push_back(bias);
    model.weights.push_back(std::move(w));
  }
  return model;
}

}  // namespace mdpm
