#pragma once

// Deterministic planted-pattern datasets with known ground truth.
//
// Every image of category c yields patches on a regular grid. With
// probability p_plant a patch receives one of c's concepts: the concept's
// m dimensions get `signal + |noise|`. Otherwise, with probability p_leak,
// it receives a concept of another category. Remaining dimensions are
// sparse rectified noise: active with probability noise_density, value
// |N(0, noise_spread)|.
//
// Randomness comes from std::mt19937_64 (fully specified by the C++
// standard) through hand-written uniform and Box-Muller transforms, so a
// seed reproduces the same bytes on any conforming platform. Each image
// has its own stream derived from (seed, image index).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mdpm/elements.hpp"
#include "mdpm/featstore.hpp"
#include "mdpm/lda.hpp"
#include "mdpm/miner.hpp"

namespace mdpm {

struct SynthSpec {
  std::uint32_t dim = 64;
  std::uint32_t categories = 3;
  std::uint32_t images_per_category = 100;
  std::uint32_t patches_per_image = 25;
  std::uint32_t concepts_per_category = 2;
  std::uint32_t items_per_concept = 4;
  double signal = 8.0;
  double noise_spread = 1.0;
  double noise_density = 0.02;
  double p_plant = 0.6;
  double p_leak = 0.02;
  std::uint32_t background_images = 0;
  std::uint64_t seed = 0;
  /// Seeds the concept layout separately, so datasets drawn with different
  /// seeds share the same concepts.
  std::uint64_t layout_seed = 0;
  std::uint32_t image_size = 256;
  std::uint32_t patch = 128;
  std::uint32_t stride = 32;
  /// Transaction length the data is meant to be mined with; only used for
  /// feasibility warnings.
  std::uint32_t mining_k = 8;

  void validate() const;
  /// Reads "key = value" lines; unknown keys are an error.
  static SynthSpec parse(std::istream& in);
};

struct SynthDataset {
  FeatureStore store{1};
  /// concepts[c * J + j] is concept j of category c.
  std::vector<ItemSet> concepts;
  std::uint32_t concepts_per_category = 0;
  /// Global concept id planted in each record, or -1.
  std::vector<std::int32_t> record_concept;
  std::vector<std::string> warnings;

  std::int32_t concept_category(std::size_t concept_id) const {
    return static_cast<std::int32_t>(concept_id / concepts_per_category);
  }
};

SynthDataset generate_dataset(const SynthSpec& spec);

/// Sidecar: one line per concept, then one line with per-record concept ids.
void write_ground_truth(const SynthDataset& data, std::ostream& out);

struct RecoveryReport {
  double precision = 1.0;
  double recall = 0.0;
  std::vector<bool> concept_hit;
  bool no_patterns = false;
};

/// A mined pattern matches a concept when it has at least two items, all
/// inside the concept.
RecoveryReport planted_recovery_report(std::span<const Pattern> mined,
                                       std::span<const ItemSet> truth);

/// Index of the first concept containing the pattern's items (|items| >= 2),
/// or -1.
std::int32_t matching_concept(const ItemSet& items, std::span<const ItemSet> truth);

/// Midpoint between the mean within-group and mean cross-group element
/// scores, each element scored by every group member's own LDA detector.
double calibrate_merge_threshold(std::span<const MidLevelElement> elements,
                                 std::span<const std::int32_t> group_of,
                                 const FeatureStore& store, const BackgroundStats& stats);

/// |a ∩ b| / |a ∪ b| of two ascending lists; 1 when both are empty.
double jaccard(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct BenchSpec {
  std::size_t transactions = 200000;
  std::uint32_t dim = 4096;
  std::uint32_t k = 20;
  std::uint32_t concepts = 200;
  std::uint32_t concept_size = 6;
  double pos_fraction = 0.5;
  double concept_rate_pos = 0.6;
  double concept_rate_neg = 0.1;
  /// Item popularity ~ rank^-skew.
  double skew = 0.5;
  std::uint64_t seed = 0;
};

/// Transactions of exactly k feature items plus a class item, drawn
/// directly (no activation vectors): a skewed item popularity plus planted
/// co-occurring concepts biased toward the positive class.
TransactionDatabase generate_bench_database(const BenchSpec& spec);

}  // namespace mdpm
