#pragma once

// Closed-form LDA detectors over background statistics, and greedy ensemble
// merging of redundant elements.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mdpm/elements.hpp"
#include "mdpm/featstore.hpp"

namespace mdpm {

inline constexpr double kDefaultShrinkage = 0.01;
inline constexpr double kTraceFloor = 1e-6;
inline constexpr double kDefaultMergeThreshold = 150.0;

/// Mean and shrunk covariance of a background activation pool:
///   cov = S + shrinkage * max(trace(S) / D, 1e-6) * I
/// where S is the unbiased sample covariance.
class BackgroundStats {
 public:
  BackgroundStats(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double shrinkage,
                  std::size_t sample_count);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
  double shrinkage() const noexcept { return shrinkage_; }
  std::size_t sample_count() const noexcept { return sample_count_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

  /// Solves covariance * x = rhs by Cholesky with one refinement step.
  /// Throws SingularMatrixError when the covariance is not positive definite.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  double shrinkage_;
  std::size_t sample_count_;
  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> factor_;
  bool singular_ = false;
};

BackgroundStats estimate_background(std::span<const std::vector<float>> activations,
                                    double shrinkage = kDefaultShrinkage);
/// Background from the given store records (e.g. all non-target records).
BackgroundStats estimate_background(const FeatureStore& store,
                                    std::span<const std::size_t> positions,
                                    double shrinkage = kDefaultShrinkage);
/// Records whose label differs from target_category.
std::vector<std::size_t> background_positions(const FeatureStore& store,
                                              std::int32_t target_category);

struct Detector {
  Eigen::VectorXd weights;
  std::vector<std::size_t> source_element_ids;
  std::int32_t category = 0;

  double score(std::span<const float> activation) const;
};

Detector train_lda(std::span<const std::vector<float>> positives,
                   const BackgroundStats& stats);
Detector train_lda(const FeatureStore& store, std::span<const std::size_t> positions,
                   const BackgroundStats& stats);

/// Mean of d^T x over the members.
double score_element(std::span<const std::vector<float>> members, const Detector& detector);
double score_element(const FeatureStore& store, std::span<const std::size_t> members,
                     const Detector& detector);

struct MergedElement {
  /// Indices into the merge input, ascending.
  std::vector<std::size_t> sources;
  std::vector<std::size_t> members;
  std::vector<std::uint32_t> member_images;
  std::int32_t category = 0;
};

struct MergeResult {
  std::vector<MergedElement> elements;
  std::vector<Detector> detectors;  // aligned with elements
};

/// Greedy merging: seed with the best-covering remaining element, then grow
/// the group with every remaining element whose mean score under the
/// group's retrained detector exceeds `threshold`, until none is added.
MergeResult ensemble_merge(std::span<const MidLevelElement> elements,
                           const FeatureStore& store, const BackgroundStats& stats,
                           double threshold, unsigned workers = 1);

/// Detector bank: "MDPM-DET" | u32 version | u32 D | u64 count, then per
/// detector i32 category | u32 n | n x u32 provenance | D x f64 weights.
void write_detectors(std::span<const Detector> detectors, std::ostream& out);
std::vector<Detector> read_detectors(std::istream& in);

/// JSON-lines dump of merged elements.
void write_merged(std::span<const MergedElement> merged, std::ostream& out);

}  // namespace mdpm
