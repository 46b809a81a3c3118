#include "mdpm/lda.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "binary_io.hpp"
#include "mdpm/error.hpp"
#include "parallel.hpp"

namespace mdpm {

namespace {

constexpr std::size_t kBlockRows = 256;

template <typename RowAt>
BackgroundStats accumulate_background(std::size_t n, Eigen::Index dim, RowAt row_at,
                                      double shrinkage) {
  if (n < 2) throw EmptyInputError("background statistics need at least 2 samples");
  if (!(shrinkage >= 0.0) || !std::isfinite(shrinkage)) {
    throw ValidationError("shrinkage must be a finite non-negative number");
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = row_at(i);
    if (static_cast<Eigen::Index>(r.size()) != dim) {
      throw ValidationError("background vectors differ in length");
    }
    for (Eigen::Index j = 0; j < dim; ++j) mean[j] += r[j];
  }
  mean /= static_cast<double>(n);

  // Blocked two-pass accumulation of the centered scatter matrix.
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd block(static_cast<Eigen::Index>(std::min(n, kBlockRows)), dim);
  for (std::size_t start = 0; start < n; start += kBlockRows) {
    const auto rows = static_cast<Eigen::Index>(std::min(kBlockRows, n - start));
    for (Eigen::Index b = 0; b < rows; ++b) {
      auto r = row_at(start + static_cast<std::size_t>(b));
      for (Eigen::Index j = 0; j < dim; ++j) block(b, j) = r[j] - mean[j];
    }
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(block.topRows(rows).transpose());
  }
  Eigen::MatrixXd cov = scatter.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n - 1);

  const double ridge = shrinkage * std::max(cov.trace() / static_cast<double>(dim), kTraceFloor);
  cov.diagonal().array() += ridge;
  return BackgroundStats(std::move(mean), std::move(cov), shrinkage, n);
}

}  // namespace

BackgroundStats::BackgroundStats(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                                 double shrinkage, std::size_t sample_count)
    : mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      shrinkage_(shrinkage),
      sample_count_(sample_count) {
  if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size()) {
    throw ValidationError("covariance shape does not match the mean");
  }
  auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(covariance_);
  if (llt->info() != Eigen::Success) {
    singular_ = true;
  } else {
    // Near-zero pivots mean the matrix is numerically singular.
    const double scale = std::max(covariance_.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    const Eigen::VectorXd pivots = llt->matrixLLT().diagonal();
    singular_ = (pivots.array().square() <= 1e-13 * scale).any();
  }
  factor_ = std::move(llt);
}

Eigen::VectorXd BackgroundStats::solve(const Eigen::VectorXd& rhs) const {
  if (singular_) {
    throw SingularMatrixError("background covariance is not positive definite; "
                              "increase the shrinkage");
  }
  Eigen::VectorXd x = factor_->solve(rhs);
  const Eigen::VectorXd residual = rhs - covariance_ * x;
  x += factor_->solve(residual);
  return x;
}

BackgroundStats estimate_background(std::span<const std::vector<float>> activations,
                                    double shrinkage) {
  const Eigen::Index dim = activations.empty() ? 0 : static_cast<Eigen::Index>(activations[0].size());
  return accumulate_background(
      activations.size(), dim,
      [&](std::size_t i) { return std::span<const float>(activations[i]); }, shrinkage);
}

BackgroundStats estimate_background(const FeatureStore& store,
                                    std::span<const std::size_t> positions,
                                    double shrinkage) {
  return accumulate_background(
      positions.size(), store.dim(),
      [&](std::size_t i) { return std::span<const float>(store[positions[i]].activation); },
      shrinkage);
}

std::vector<std::size_t> background_positions(const FeatureStore& store,
                                              std::int32_t target_category) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store[i].class_label != target_category) out.push_back(i);
  }
  return out;
}

double Detector::score(std::span<const float> activation) const {
  if (static_cast<Eigen::Index>(activation.size()) != weights.size()) {
    throw ValidationError("detector and activation dimensions differ");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < activation.size(); ++j) s += weights[static_cast<Eigen::Index>(j)] * activation[j];
  return s;
}

namespace {

Detector solve_detector(const Eigen::VectorXd& positive_mean, const BackgroundStats& stats) {
  Detector d;
  d.weights = stats.solve(positive_mean - stats.mean());
  if (!d.weights.allFinite()) throw SingularMatrixError("LDA solve produced non-finite weights");
  return d;
}

}  // namespace

Detector train_lda(std::span<const std::vector<float>> positives,
                   const BackgroundStats& stats) {
  if (positives.empty()) throw EmptyInputError("LDA needs at least one positive");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(stats.dim());
  for (const auto& v : positives) {
    if (static_cast<Eigen::Index>(v.size()) != stats.dim()) {
      throw ValidationError("positive vector length does not match background");
    }
    for (Eigen::Index j = 0; j < stats.dim(); ++j) mean[j] += v[static_cast<std::size_t>(j)];
  }
  mean /= static_cast<double>(positives.size());
  return solve_detector(mean, stats);
}

Detector train_lda(const FeatureStore& store, std::span<const std::size_t> positions,
                   const BackgroundStats& stats) {
  if (positions.empty()) throw EmptyInputError("LDA needs at least one positive");
  if (static_cast<Eigen::Index>(store.dim()) != stats.dim()) {
    throw ValidationError("store dimension does not match background");
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(stats.dim());
  for (auto pos : positions) {
    const auto& a = store[pos].activation;
    for (Eigen::Index j = 0; j < stats.dim(); ++j) mean[j] += a[static_cast<std::size_t>(j)];
  }
  mean /= static_cast<double>(positions.size());
  return solve_detector(mean, stats);
}

double score_element(std::span<const std::vector<float>> members, const Detector& detector) {
  if (members.empty()) throw EmptyInputError("cannot score an element without members");
  double total = 0.0;
  for (const auto& x : members) total += detector.score(x);
  return total / static_cast<double>(members.size());
}

double score_element(const FeatureStore& store, std::span<const std::size_t> members,
                     const Detector& detector) {
  if (members.empty()) throw EmptyInputError("cannot score an element without members");
  double total = 0.0;
  for (auto pos : members) total += detector.score(store[pos].activation);
  return total / static_cast<double>(members.size());
}

MergeResult ensemble_merge(std::span<const MidLevelElement> elements,
                           const FeatureStore& store, const BackgroundStats& stats,
                           double threshold, unsigned workers) {
  if (elements.empty()) throw EmptyInputError("nothing to merge");
  if (std::isnan(threshold)) throw ValidationError("merge threshold must not be NaN");
  for (const auto& e : elements) {
    if (e.members.empty()) throw ValidationError("element without members");
    if (e.members.back() >= store.size()) throw ValidationError("element member out of range");
  }

  // Remaining elements, kept in seed order so the next seed is the front.
  std::vector<std::size_t> remaining(elements.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::stable_sort(remaining.begin(), remaining.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(elements[a], elements[b]);
  });

  MergeResult result;
  std::vector<char> in_group(elements.size(), 0);
  std::vector<double> scores(elements.size());
  while (!remaining.empty()) {
    std::vector<std::size_t> group{remaining.front()};
    in_group[remaining.front()] = 1;
    std::vector<std::size_t> pooled = elements[remaining.front()].members;
    Detector detector;
    for (;;) {
      detector = train_lda(store, pooled, stats);
      std::vector<std::size_t> candidates;
      for (auto id : remaining) {
        if (!in_group[id]) candidates.push_back(id);
      }
      detail::parallel_chunks(candidates.size(), workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t c = b; c < e; ++c) {
          scores[candidates[c]] = score_element(store, elements[candidates[c]].members, detector);
        }
      });
      std::vector<std::size_t> added;
      for (auto id : candidates) {
        if (scores[id] > threshold) added.push_back(id);
      }
      if (added.empty()) break;
      for (auto id : added) {
        in_group[id] = 1;
        group.push_back(id);
        std::vector<std::size_t> merged;
        std::set_union(pooled.begin(), pooled.end(), elements[id].members.begin(),
                       elements[id].members.end(), std::back_inserter(merged));
        pooled.swap(merged);
      }
    }

    std::sort(group.begin(), group.end());
    MergedElement m;
    m.sources = group;
    m.members = pooled;
    m.category = elements[group.front()].pattern.category;
    for (auto pos : m.members) m.member_images.push_back(store[pos].image_id);
    std::sort(m.member_images.begin(), m.member_images.end());
    m.member_images.erase(std::unique(m.member_images.begin(), m.member_images.end()),
                          m.member_images.end());
    detector.source_element_ids = group;
    detector.category = m.category;
    result.elements.push_back(std::move(m));
    result.detectors.push_back(std::move(detector));

    std::erase_if(remaining, [&](std::size_t id) { return in_group[id] != 0; });
  }
  return result;
}

namespace {
constexpr std::array<char, 8> kDetMagic = {'M', 'D', 'P', 'M', '-', 'D', 'E', 'T'};
}

void write_detectors(std::span<const Detector> detectors, std::ostream& out) {
  using detail::put_le;
  const std::uint32_t dim = detectors.empty() ? 0 : static_cast<std::uint32_t>(detectors[0].weights.size());
  out.write(kDetMagic.data(), kDetMagic.size());
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, dim);
  put_le<std::uint64_t>(out, detectors.size());
  for (const auto& d : detectors) {
    if (static_cast<std::uint32_t>(d.weights.size()) != dim) {
      throw ValidationError("detectors in one bank must share a dimension");
    }
    put_le<std::int32_t>(out, d.category);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.source_element_ids.size()));
    for (auto id : d.source_element_ids) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(id));
    for (Eigen::Index j = 0; j < d.weights.size(); ++j) put_le<double>(out, d.weights[j]);
  }
  if (!out) throw IoError("failed writing detector bank", 0);
}

std::vector<Detector> read_detectors(std::istream& in) {
  using detail::get_le;
  std::array<unsigned char, 24> header{};
  if (detail::read_some(in, header.data(), header.size()) != header.size()) {
    throw FormatError("detector bank shorter than its header");
  }
  if (!std::equal(kDetMagic.begin(), kDetMagic.end(), header.begin(),
                  [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; })) {
    throw FormatError("bad magic: not a detector bank");
  }
  if (get_le<std::uint32_t>(header.data() + 8) != 1) throw FormatError("unsupported detector bank version");
  const auto dim = get_le<std::uint32_t>(header.data() + 12);
  const auto count = get_le<std::uint64_t>(header.data() + 16);
  std::vector<Detector> out;
  std::array<unsigned char, 8> word{};
  auto need = [&](std::size_t n, std::uint64_t rec) {
    if (detail::read_some(in, word.data(), n) != n) throw TruncationError("detector bank truncated", rec);
  };
  for (std::uint64_t r = 0; r < count; ++r) {
    Detector d;
    need(4, r);
    d.category = get_le<std::int32_t>(word.data());
    need(4, r);
    const auto n = get_le<std::uint32_t>(word.data());
    for (std::uint32_t k = 0; k < n; ++k) {
      need(4, r);
      d.source_element_ids.push_back(get_le<std::uint32_t>(word.data()));
    }
    d.weights.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j) {
      need(8, r);
      d.weights[j] = get_le<double>(word.data());
    }
    out.push_back(std::move(d));
  }
  return out;
}

void write_merged(std::span<const MergedElement> merged, std::ostream& out) {
  auto list = [&](const auto& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << ']';
  };
  for (const auto& m : merged) {
    out << "{\"category\":" << m.category << ",\"sources\":";
    list(m.sources);
    out << ",\"members\":";
    list(m.members);
    out << ",\"images\":";
    list(m.member_images);
    out << ",\"coverage\":" << m.member_images.size() << "}\n";
  }
}

}  // namespace mdpm
