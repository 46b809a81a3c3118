#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "mdpm/error.hpp"
#include "mdpm/learn.hpp"

namespace mdpm {
namespace {

LinearModel two_axis_model() {
  LinearModel m;
  m.categories = {0, 1};
  m.weights = {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  m.biases = {0.0, 0.0};
  m.lambdas = {0.1, 0.1};
  return m;
}

// std::vector<bool> is not contiguous, so flags live in a plain array.
class Flags {
 public:
  Flags(std::initializer_list<bool> v) : n_(v.size()), data_(new bool[v.size()]) {
    std::copy(v.begin(), v.end(), data_.get());
  }
  explicit Flags(std::size_t n) : n_(n), data_(new bool[n]()) {}
  bool& operator[](std::size_t i) { return data_[i]; }
  std::span<const bool> span() const { return {data_.get(), n_}; }

 private:
  std::size_t n_;
  std::unique_ptr<bool[]> data_;
};

struct Data {
  std::vector<std::vector<double>> x;
  std::vector<std::int32_t> labels;
};

Data clusters(std::mt19937_64& rng, std::size_t per_class, std::size_t dim,
              const std::vector<double>& centers) {
  std::normal_distribution<double> n(0.0, 1.0);
  Data d;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = centers[c] + n(rng);
      d.x.push_back(v);
      d.labels.push_back(static_cast<std::int32_t>(c));
    }
  }
  return d;
}

TEST(Scores, AxisModelExample) {
  const auto m = two_axis_model();
  const std::vector<double> x = {3, 1};
  EXPECT_EQ(decision_scores(m, x), (std::vector<double>{3, 1}));
  EXPECT_EQ(predict(m, x), 0);
}

TEST(Scores, ZeroInputGivesBiases) {
  auto m = two_axis_model();
  m.biases = {0.25, -2.0};
  EXPECT_EQ(decision_scores(m, std::vector<double>{0, 0}), (std::vector<double>{0.25, -2.0}));
}

TEST(Scores, TiesGoToLowestCategoryAndLengthIsChecked) {
  auto m = two_axis_model();
  m.categories = {3, 7};
  EXPECT_EQ(predict(m, std::vector<double>{2, 2}), 3);
  EXPECT_THROW(decision_scores(m, std::vector<double>{1, 2, 3}), ValidationError);
}

TEST(Scores, LinearInPositiveScaling) {
  const auto m = two_axis_model();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> x = {u(rng), u(rng)};
    const double c = 0.1 + std::abs(u(rng));
    const std::vector<double> cx = {c * x[0], c * x[1]};
    const auto a = decision_scores(m, x);
    const auto b = decision_scores(m, cx);
    for (std::size_t k = 0; k < 2; ++k) ASSERT_NEAR(b[k], c * a[k], 1e-12);
    ASSERT_EQ(predict(m, x), predict(m, cx));
  }
}

TEST(AveragePrecision, Examples) {
  EXPECT_EQ(average_precision(std::vector<double>{0.9, 0.1}, Flags{true, false}.span()), 1.0);
  EXPECT_EQ(average_precision(std::vector<double>{0.9, 0.1}, Flags{false, true}.span()), 0.5);
  EXPECT_EQ(average_precision(std::vector<double>{0.1, 5, -3}, Flags{true, true, true}.span()), 1.0);
  // Ranking +,-,+: precision 1 at recall 1/2, 2/3 at recall 1.
  EXPECT_NEAR(average_precision(std::vector<double>{3, 2, 1}, Flags{true, false, true}.span()),
              0.5 * 1.0 + 0.5 * (2.0 / 3.0), 1e-15);
  // Interpolation lifts the earlier dip: +,-,-,+,+ -> 1/3 * 1 + 2/3 * 3/5.
  EXPECT_NEAR(average_precision(std::vector<double>{5, 4, 3, 2, 1},
                                Flags{true, false, false, true, true}.span()),
              1.0 / 3.0 + (2.0 / 3.0) * 0.6, 1e-15);
}

TEST(AveragePrecision, Errors) {
  EXPECT_THROW(average_precision(std::vector<double>{1, 2}, Flags{false, false}.span()), UndefinedError);
  EXPECT_THROW(average_precision(std::vector<double>{1}, Flags{true, false}.span()), ValidationError);
}

TEST(AveragePrecision, TiesKeepInputOrder) {
  EXPECT_EQ(average_precision(std::vector<double>{1, 1}, Flags{true, false}.span()), 1.0);
  EXPECT_EQ(average_precision(std::vector<double>{1, 1}, Flags{false, true}.span()), 0.5);
}

TEST(AveragePrecision, PropertiesOnRandomRankings) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<double> s(n);
    Flags pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 1000) / 10.0;
      pos[i] = rng() % 3 == 0;
    }
    pos[rng() % n] = true;
    const double ap = average_precision(s, pos.span());
    ASSERT_GT(ap, 0.0);
    ASSERT_LE(ap, 1.0);
    // Strictly monotone transform leaves AP unchanged.
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(s[i] / 10.0) * 3.0 - 7.0;
    ASSERT_EQ(ap, average_precision(t, pos.span()));
    // AP = 1 exactly when every positive outranks every negative.
    double min_pos = INFINITY, max_neg = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) {
      if (pos[i]) min_pos = std::min(min_pos, s[i]);
      else max_neg = std::max(max_neg, s[i]);
    }
    if (min_pos > max_neg) ASSERT_EQ(ap, 1.0);
    if (min_pos < max_neg) ASSERT_LT(ap, 1.0);
  }
}

TEST(Training, SeparableClustersReachFullAccuracy) {
  std::mt19937_64 rng(3);
  const auto d = clusters(rng, 40, 6, {0.0, 10.0});
  const auto model = train_ovr(d.x, d.labels);
  EXPECT_EQ(accuracy(model, d.x, d.labels), 1.0);
  EXPECT_EQ(model.categories, (std::vector<std::int32_t>{0, 1}));
  EXPECT_EQ(model.dim(), 6u);
}

TEST(Training, ThreeClusterOneVsRest) {
  std::mt19937_64 rng(4);
  Data d;
  std::normal_distribution<double> n(0.0, 0.5);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 30; ++i) {
      std::vector<double> v(3, 0.0);
      for (auto& x : v) x = n(rng);
      v[static_cast<std::size_t>(c)] += 8.0;
      d.x.push_back(v);
      d.labels.push_back(c * 2);  // non-contiguous ids
    }
  }
  const auto model = train_ovr(d.x, d.labels);
  EXPECT_EQ(model.categories, (std::vector<std::int32_t>{0, 2, 4}));
  EXPECT_EQ(accuracy(model, d.x, d.labels), 1.0);
  const auto aps = per_category_ap(model, d.x, d.labels);
  ASSERT_EQ(aps.size(), 3u);
  for (const auto& a : aps) EXPECT_EQ(a.ap, 1.0);
}

TEST(Training, RandomLabelsGeneralizeAtChance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  auto sample = [&](std::size_t count) {
    Data d;
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> v(5);
      for (auto& x : v) x = n(rng);
      d.x.push_back(v);
      d.labels.push_back(static_cast<std::int32_t>(rng() % 2));
    }
    return d;
  };
  const auto train = sample(200);
  const auto test = sample(400);
  const double acc = accuracy(train_ovr(train.x, train.labels), test.x, test.labels);
  // 4 standard deviations of a fair binomial over 400 draws.
  EXPECT_NEAR(acc, 0.5, 0.1);
}

TEST(Training, InputErrors) {
  const std::vector<std::vector<double>> x = {{1}, {2}};
  EXPECT_THROW(train_ovr(x, std::vector<std::int32_t>{0, 0}), ValidationError);
  EXPECT_THROW(train_ovr(x, std::vector<std::int32_t>{0}), ValidationError);
  SvmOptions one_fold;
  one_fold.folds = 1;
  EXPECT_THROW(train_ovr(x, std::vector<std::int32_t>{0, 1}, one_fold), ValidationError);
  EXPECT_THROW(train_binary_svm(x, std::vector<int>{1, -1}, 0.0), ValidationError);
}

TEST(Training, DeterministicAndWorkerIndependent) {
  std::mt19937_64 rng(6);
  const auto d = clusters(rng, 25, 4, {0.0, 1.5, 3.0});
  SvmOptions serial, parallel;
  parallel.workers = 4;
  const auto a = train_ovr(d.x, d.labels, serial);
  const auto b = train_ovr(d.x, d.labels, parallel);
  for (std::size_t c = 0; c < a.categories.size(); ++c) {
    EXPECT_EQ(a.weights[c], b.weights[c]);
    EXPECT_EQ(a.biases[c], b.biases[c]);
    EXPECT_EQ(a.lambdas[c], b.lambdas[c]);
  }
}

// Averaged full-batch subgradient descent run for a long time.
double reference_objective(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                           double lambda) {
  const std::size_t d = x[0].size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d + 1));
  Eigen::VectorXd avg = w;
  double best = INFINITY;
  for (int t = 1; t <= 200000; ++t) {
    Eigen::VectorXd g = lambda * w;
    for (std::size_t i = 0; i < x.size(); ++i) {
      Eigen::VectorXd xi(static_cast<Eigen::Index>(d + 1));
      for (std::size_t j = 0; j < d; ++j) xi[static_cast<Eigen::Index>(j)] = x[i][j];
      xi[static_cast<Eigen::Index>(d)] = 1.0;
      if (y[i] * w.dot(xi) < 1.0) g -= static_cast<double>(y[i]) * xi / static_cast<double>(x.size());
    }
    w -= g / (lambda * t);
    avg += (w - avg) / t;
    if (t % 1000 == 0) {
      for (const auto* v : {&w, &avg}) {
        best = std::min(best, hinge_objective(x, y, v->head(static_cast<Eigen::Index>(d)),
                                              (*v)[static_cast<Eigen::Index>(d)], lambda));
      }
    }
  }
  return best;
}

TEST(Training, ObjectiveMatchesLongRunReference) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 30; ++i) {
      const int label = i % 2 ? 1 : -1;
      x.push_back({n(rng) + 0.8 * label, n(rng), n(rng) - 0.3 * label});
      y.push_back(label);
    }
    const double lambda = trial == 0 ? 0.1 : trial == 1 ? 1.0 : 0.01;
    const auto svm = train_binary_svm(x, y, lambda);
    const double fit = hinge_objective(x, y, svm.weights, svm.bias, lambda);
    const double ref = reference_objective(x, y, lambda);
    EXPECT_LE(fit, ref * (1.0 + 1e-4)) << "lambda " << lambda;
    EXPECT_GE(fit, ref * (1.0 - 1e-4)) << "lambda " << lambda;
  }
}

TEST(Training, DuplicatingDataKeepsTheDirection) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2 ? 1 : -1;
    x.push_back({n(rng) + label, n(rng), n(rng)});
    y.push_back(label);
  }
  auto x2 = x;
  auto y2 = y;
  x2.insert(x2.end(), x.begin(), x.end());
  y2.insert(y2.end(), y.begin(), y.end());
  for (double lambda : {0.01, 0.1, 1.0, 10.0}) {
    const auto a = train_binary_svm(x, y, lambda);
    const auto b = train_binary_svm(x2, y2, lambda);
    Eigen::VectorXd wa(4), wb(4);
    wa << a.weights, a.bias;
    wb << b.weights, b.bias;
    EXPECT_LE((wa.normalized() - wb.normalized()).norm(), 1e-6) << "lambda " << lambda;
  }
}

TEST(ModelFile, RoundTrip) {
  auto m = two_axis_model();
  m.weights[0] = Eigen::Vector2d(0.1 + 1e-17, -1.0 / 3.0);
  m.biases = {1e-300, -2.5};
  m.lambdas = {0.01, 10.0};
  std::ostringstream out;
  write_model(m, out);
  std::istringstream in(out.str());
  const auto back = read_model(in);
  EXPECT_EQ(back.categories, m.categories);
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_EQ(back.weights[c], m.weights[c]);
    EXPECT_EQ(back.biases[c], m.biases[c]);
    EXPECT_EQ(back.lambdas[c], m.lambdas[c]);
  }
  std::istringstream junk("not a model");
  EXPECT_THROW(read_model(junk), FormatError);
}

}  // namespace
}  // namespace mdpm
