#pragma once

// Image-level encodings over a spatial pyramid.
//
// Both encoders produce cells * (X * Y) values laid out cell-major: all
// pattern (or detector) columns for cell 0, then cell 1, and so on. Columns
// follow the given pattern/detector order, which must be category-major.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mdpm/featstore.hpp"
#include "mdpm/lda.hpp"
#include "mdpm/miner.hpp"

namespace mdpm {

struct GridShape {
  std::uint32_t rows = 1;
  std::uint32_t cols = 1;
};

struct PyramidLayout {
  std::vector<GridShape> levels{{1, 1}, {2, 2}};

  std::size_t cell_count() const;
  /// Parses "1x1+2x2".
  static PyramidLayout parse(const std::string& text);
};

/// A patch as seen by the encoders.
struct PatchView {
  std::span<const float> activation;
  PatchGeometry geometry;
};

struct ImageEncoding {
  std::vector<double> values;
  std::size_t per_category = 0;  // X
  std::size_t categories = 0;    // Y
  std::size_t cells = 0;
};

/// One global cell index per pyramid level, chosen by the patch center.
/// Cells are half-open except the last row/column, which is closed at the
/// image edge.
std::vector<std::size_t> pyramid_cell_of(const PatchGeometry& geometry,
                                         std::uint32_t image_w, std::uint32_t image_h,
                                         const PyramidLayout& layout);

/// Bag-of-Patterns counts before normalization: for each patch, every
/// pattern contained in the patch's non-zero support adds one to each cell
/// holding the patch.
ImageEncoding bop_counts(std::span<const PatchView> patches,
                         std::span<const Pattern> patterns, std::uint32_t image_w,
                         std::uint32_t image_h, const PyramidLayout& layout);

/// bop_counts with every cell block L2-normalized (all-zero blocks stay zero).
ImageEncoding encode_bop(std::span<const PatchView> patches,
                         std::span<const Pattern> patterns, std::uint32_t image_w,
                         std::uint32_t image_h, const PyramidLayout& layout);

struct ScaleInput {
  std::span<const PatchView> patches;
  std::uint32_t image_w = 0;
  std::uint32_t image_h = 0;
};

/// Bag-of-Elements: per scale, per cell, per detector the maximum response
/// of the unit-normalized detector; then the maximum over scales. Cells that
/// receive no patch at any scale hold 0.
ImageEncoding encode_boe(std::span<const ScaleInput> scales,
                         std::span<const Detector> detectors,
                         const PyramidLayout& layout);

/// Resize factors spaced by sqrt(2): 1, 2^-1/2, 2^-1, ...
std::vector<double> default_scale_factors(std::size_t count);

/// Encodings stored in MDPM-FEAT layout, one record per image with zeroed
/// geometry.
struct EncodedImage {
  std::uint32_t image_id = 0;
  std::int32_t label = 0;
  std::vector<double> values;
};
void write_encodings(std::span<const EncodedImage> images, std::ostream& out);
std::vector<EncodedImage> read_encodings(std::istream& in);

}  // namespace mdpm
