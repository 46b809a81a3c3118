#pragma once

// Store-level glue shared by the command-line tool and the bindings: mining
// and retrieval for one target category, and per-image encoding of whole
// feature stores.

#include <cstdint>
#include <span>
#include <vector>

#include "mdpm/elements.hpp"
#include "mdpm/encode.hpp"
#include "mdpm/featstore.hpp"
#include "mdpm/lda.hpp"
#include "mdpm/miner.hpp"

namespace mdpm {

/// Ascending distinct non-negative class labels of a store.
std::vector<std::int32_t> store_categories(const FeatureStore& store);

/// Builds the target's transaction database and mines rules with the
/// positive class item as consequent. cfg.consequent and cfg.category are
/// overwritten.
std::vector<Pattern> mine_category(const FeatureStore& store, std::uint32_t k,
                                   std::int32_t target, MiningConfig cfg);

/// Retrieves one element per pattern (patterns of a single category).
std::vector<MidLevelElement> retrieve_category(const FeatureStore& store, std::uint32_t k,
                                               std::int32_t target,
                                               std::span<const Pattern> patterns,
                                               unsigned workers = 1);

/// Image extent implied by a set of patches: right-most and bottom-most
/// patch edge.
struct Extent {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};
Extent patch_extent(const FeatureStore& store, std::span<const std::size_t> positions);

/// One encoding per image of `store`, in ascending image id. The label is
/// the image's record label. Extents come from `patch_extent` unless a
/// fixed size is given (non-zero).
std::vector<EncodedImage> encode_store_bop(const FeatureStore& store,
                                           std::span<const Pattern> patterns,
                                           const PyramidLayout& layout, Extent fixed = {},
                                           unsigned workers = 1);

/// `scales` hold the same images at different resize factors; an image
/// takes its patches from every scale that contains it.
std::vector<EncodedImage> encode_store_boe(std::span<const FeatureStore* const> scales,
                                           std::span<const Detector> detectors,
                                           const PyramidLayout& layout, Extent fixed = {},
                                           unsigned workers = 1);

}  // namespace mdpm
