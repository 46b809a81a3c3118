#include "mdpm/context.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>

#include "binary_io.hpp"
#include "mdpm/error.hpp"
#include "mdpm/io.hpp"

namespace mdpm {

PixelMasks::PixelMasks(std::uint16_t width, std::uint16_t height,
                       std::vector<std::uint8_t> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  if (width == 0 || height == 0) throw ValidationError("mask must be non-empty");
  if (labels_.size() != static_cast<std::size_t>(width) * height) {
    throw ValidationError("mask label count does not match its size");
  }
  for (auto v : labels_) {
    if (v > 2) throw ValidationError("mask label out of range (expected 0, 1 or 2)");
  }
}

PixelMasks::PixelMasks(std::uint16_t width, std::uint16_t height)
    : PixelMasks(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)) {}

void PixelMasks::fill(std::uint32_t x, std::uint32_t y, std::uint32_t w, std::uint32_t h,
                      PixelClass c) {
  const auto x1 = std::min<std::uint32_t>(width_, x + w);
  const auto y1 = std::min<std::uint32_t>(height_, y + h);
  for (auto yy = y; yy < y1; ++yy) {
    for (auto xx = x; xx < x1; ++xx) set(xx, yy, c);
  }
}

std::string_view to_string(FiringType type) {
  switch (type) {
    case FiringType::SceneContext: return "scene-context";
    case FiringType::ObjectContext: return "object-context";
    case FiringType::GroundTruthObject: return "gt-object";
    case FiringType::Unresolved: return "unresolved";
  }
  return "unresolved";
}

OverlapCounts overlap_counts(const PatchGeometry& box, const PixelMasks& masks) {
  const std::uint32_t x0 = box.x, y0 = box.y;
  const std::uint32_t x1 = std::min<std::uint32_t>(masks.width(), x0 + box.w);
  const std::uint32_t y1 = std::min<std::uint32_t>(masks.height(), y0 + box.h);
  if (box.w == 0 || box.h == 0 || x0 >= x1 || y0 >= y1) {
    throw ValidationError("box lies outside the image");
  }
  OverlapCounts c;
  for (auto y = y0; y < y1; ++y) {
    for (auto x = x0; x < x1; ++x) {
      switch (masks.at(x, y)) {
        case PixelClass::GroundTruth: ++c.gt; break;
        case PixelClass::OtherObject: ++c.ot; break;
        case PixelClass::Scene: ++c.sc; break;
      }
    }
  }
  return c;
}

OverlapRatios overlap_ratios(const PatchGeometry& box, const PixelMasks& masks) {
  const auto c = overlap_counts(box, masks);
  const double n = static_cast<double>(c.total());
  return {static_cast<double>(c.gt) / n, static_cast<double>(c.ot) / n,
          static_cast<double>(c.sc) / n};
}

FiringType classify_firing(const OverlapRatios& r) {
  const bool finite = std::isfinite(r.gt) && std::isfinite(r.ot) && std::isfinite(r.sc);
  if (!finite || r.gt < 0.0 || r.ot < 0.0 || r.sc < 0.0 ||
      std::abs(r.gt + r.ot + r.sc - 1.0) > 1e-12) {
    throw ValidationError("overlap ratios must be non-negative and sum to 1");
  }
  if (r.sc > 0.9) return FiringType::SceneContext;
  if (r.ot > r.gt) return FiringType::ObjectContext;
  if (r.ot < r.gt) return FiringType::GroundTruthObject;
  return FiringType::Unresolved;
}

FiringType classify_firing(const OverlapCounts& c) {
  if (c.total() == 0) throw ValidationError("empty box");
  if (10 * c.sc > 9 * c.total()) return FiringType::SceneContext;
  if (c.ot > c.gt) return FiringType::ObjectContext;
  if (c.ot < c.gt) return FiringType::GroundTruthObject;
  return FiringType::Unresolved;
}

FiringType element_firing_type(std::span<const ImageDetections> per_image,
                               const std::map<std::uint32_t, PixelMasks>& masks,
                               double score_threshold) {
  // Votes indexed by precedence: GroundTruthObject, ObjectContext, SceneContext.
  std::array<std::size_t, 3> votes{};
  for (const auto& img : per_image) {
    if (img.detections.empty()) continue;
    const auto best = std::max_element(
        img.detections.begin(), img.detections.end(),
        [](const ScoredBox& a, const ScoredBox& b) { return a.score < b.score; });
    if (!(best->score > score_threshold)) continue;
    auto it = masks.find(img.image_id);
    if (it == masks.end()) {
      throw ValidationError("no mask for image " + std::to_string(img.image_id));
    }
    switch (classify_firing(overlap_counts(best->box, it->second))) {
      case FiringType::GroundTruthObject: ++votes[0]; break;
      case FiringType::ObjectContext: ++votes[1]; break;
      case FiringType::SceneContext: ++votes[2]; break;
      case FiringType::Unresolved: break;
    }
  }
  const auto top = std::max_element(votes.begin(), votes.end());
  if (*top == 0) return FiringType::Unresolved;
  constexpr std::array<FiringType, 3> order = {
      FiringType::GroundTruthObject, FiringType::ObjectContext, FiringType::SceneContext};
  return order[static_cast<std::size_t>(top - votes.begin())];
}

namespace {
constexpr std::array<char, 8> kMaskMagic = {'M', 'D', 'P', 'M', '-', 'M', 'S', 'K'};
}

void write_mask(const PixelMasks& masks, std::ostream& out) {
  out.write(kMaskMagic.data(), kMaskMagic.size());
  detail::put_le<std::uint16_t>(out, masks.width());
  detail::put_le<std::uint16_t>(out, masks.height());
  detail::put_le<std::uint32_t>(out, 0);
  out.write(reinterpret_cast<const char*>(masks.labels().data()),
            static_cast<std::streamsize>(masks.labels().size()));
  if (!out) throw IoError("failed writing mask", 0);
}

PixelMasks read_mask(std::istream& in) {
  std::array<unsigned char, 16> header{};
  if (detail::read_some(in, header.data(), header.size()) != header.size()) {
    throw FormatError("mask file shorter than its 16-byte header");
  }
  if (!std::equal(kMaskMagic.begin(), kMaskMagic.end(), header.begin(),
                  [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; })) {
    throw FormatError("bad magic: not an MDPM-MSK file");
  }
  const auto w = detail::get_le<std::uint16_t>(header.data() + 8);
  const auto h = detail::get_le<std::uint16_t>(header.data() + 10);
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(w) * h);
  if (detail::read_some(in, labels.data(), labels.size()) != labels.size()) {
    throw TruncationError("mask pixels truncated", 0);
  }
  return PixelMasks(w, h, std::move(labels));
}

void write_context_report(std::span<const FiringType> types, std::ostream& out) {
  constexpr std::array<FiringType, 4> all = {FiringType::GroundTruthObject,
                                             FiringType::ObjectContext,
                                             FiringType::SceneContext, FiringType::Unresolved};
  std::array<std::size_t, 4> counts{};
  for (std::size_t e = 0; e < types.size(); ++e) {
    out << "{\"element\":" << e << ",\"type\":\"" << to_string(types[e]) << "\"}\n";
    counts[static_cast<std::size_t>(std::find(all.begin(), all.end(), types[e]) - all.begin())]++;
  }
  out << "{\"summary\":{";
  for (std::size_t t = 0; t < all.size(); ++t) {
    const double pct = types.empty() ? 0.0
                                     : 100.0 * static_cast<double>(counts[t]) /
                                           static_cast<double>(types.size());
    out << (t ? "," : "") << '"' << to_string(all[t]) << "\":" << format_real(pct);
  }
  out << "}}\n";
}

}  // namespace mdpm
