#pragma once

// Firing-type analysis: where does a detector fire relative to the labeled
// object pixels?

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "mdpm/featstore.hpp"

namespace mdpm {

enum class PixelClass : std::uint8_t { Scene = 0, GroundTruth = 1, OtherObject = 2 };

/// Per-pixel labels, row-major. Every pixel carries exactly one class, so
/// the three pixel sets partition the image.
class PixelMasks {
 public:
  PixelMasks(std::uint16_t width, std::uint16_t height,
             std::vector<std::uint8_t> labels);
  /// All pixels Scene.
  PixelMasks(std::uint16_t width, std::uint16_t height);

  std::uint16_t width() const noexcept { return width_; }
  std::uint16_t height() const noexcept { return height_; }
  PixelClass at(std::uint32_t x, std::uint32_t y) const {
    return static_cast<PixelClass>(labels_[static_cast<std::size_t>(y) * width_ + x]);
  }
  void set(std::uint32_t x, std::uint32_t y, PixelClass c) {
    labels_[static_cast<std::size_t>(y) * width_ + x] = static_cast<std::uint8_t>(c);
  }
  /// Labels a rectangle, clipped to the image.
  void fill(std::uint32_t x, std::uint32_t y, std::uint32_t w, std::uint32_t h, PixelClass c);
  std::span<const std::uint8_t> labels() const noexcept { return labels_; }

 private:
  std::uint16_t width_;
  std::uint16_t height_;
  std::vector<std::uint8_t> labels_;
};

/// Pixel counts of a box (clipped to the image) per class.
struct OverlapCounts {
  std::uint64_t gt = 0;
  std::uint64_t ot = 0;
  std::uint64_t sc = 0;
  std::uint64_t total() const noexcept { return gt + ot + sc; }
};

struct OverlapRatios {
  double gt = 0.0;
  double ot = 0.0;
  double sc = 0.0;
};

enum class FiringType { SceneContext, ObjectContext, GroundTruthObject, Unresolved };

std::string_view to_string(FiringType type);

/// Throws ValidationError when the box misses the image entirely.
OverlapCounts overlap_counts(const PatchGeometry& box, const PixelMasks& masks);
OverlapRatios overlap_ratios(const PatchGeometry& box, const PixelMasks& masks);

/// Scene context if O_sc > 0.9; otherwise object context if O_ot > O_gt,
/// ground-truth object if O_ot < O_gt, and Unresolved on a tie.
FiringType classify_firing(const OverlapRatios& ratios);
/// Same rules on exact counts.
FiringType classify_firing(const OverlapCounts& counts);

struct ScoredBox {
  PatchGeometry box;
  double score = 0.0;
};

struct ImageDetections {
  std::uint32_t image_id = 0;
  std::vector<ScoredBox> detections;
};

/// Keeps each image's best box when its score exceeds the threshold, types
/// it, and returns the plurality type. Ties prefer GroundTruthObject, then
/// ObjectContext, then SceneContext; no kept boxes gives Unresolved. Boxes
/// that type as Unresolved do not vote.
FiringType element_firing_type(std::span<const ImageDetections> per_image,
                               const std::map<std::uint32_t, PixelMasks>& masks,
                               double score_threshold);

/// "MDPM-MSK" | u16 width | u16 height | 4 pad bytes | width*height labels.
void write_mask(const PixelMasks& masks, std::ostream& out);
PixelMasks read_mask(std::istream& in);

/// Per-element type lines followed by the percentage of elements per type.
void write_context_report(std::span<const FiringType> types, std::ostream& out);

}  // namespace mdpm
