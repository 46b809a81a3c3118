#pragma once

// Patch feature storage: the MDPM-FEAT v1 binary format, an in-memory
// store of patch records, and patch-grid sampling.
//
// MDPM-FEAT v1 (little-endian):
//   header  : "MDPM" | u32 version=1 | u32 dim | u64 count          (20 bytes)
//   record  : u32 image_id | i32 label | u16 x,y,w,h | f32 scale
//             | dim x f32 activation                          (20 + 4*dim)

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace mdpm {

inline constexpr std::int32_t kBackgroundLabel = -1;

struct PatchGeometry {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint16_t w = 0;
  std::uint16_t h = 0;
  float scale = 1.0f;

  friend bool operator==(const PatchGeometry&, const PatchGeometry&) = default;
};

struct PatchRecord {
  std::uint32_t image_id = 0;
  std::int32_t class_label = kBackgroundLabel;
  PatchGeometry geometry;
  std::vector<float> activation;

  friend bool operator==(const PatchRecord&, const PatchRecord&) = default;
};

/// Immutable-after-construction collection of patch records sharing one
/// activation dimension.
class FeatureStore {
 public:
  explicit FeatureStore(std::uint32_t dim);
  FeatureStore(std::uint32_t dim, std::vector<PatchRecord> records);

  /// Appends a record after validating its dimension and non-negativity.
  void add(PatchRecord record);

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const PatchRecord& operator[](std::size_t pos) const { return records_[pos]; }
  std::span<const PatchRecord> records() const noexcept { return records_; }

  /// Record positions belonging to an image, in store order. Empty if the
  /// image is unknown.
  std::span<const std::size_t> image_records(std::uint32_t image_id) const;
  const std::map<std::uint32_t, std::vector<std::size_t>>& image_index() const {
    return image_index_;
  }
  std::size_t image_count() const noexcept { return image_index_.size(); }

  friend bool operator==(const FeatureStore& a, const FeatureStore& b) {
    return a.dim_ == b.dim_ && a.records_ == b.records_;
  }

 private:
  std::uint32_t dim_;
  std::vector<PatchRecord> records_;
  std::map<std::uint32_t, std::vector<std::size_t>> image_index_;
};

inline constexpr std::size_t kFeatHeaderBytes = 20;
inline constexpr std::size_t feat_record_bytes(std::uint32_t dim) {
  return 20 + 4 * static_cast<std::size_t>(dim);
}

/// Writes the store in MDPM-FEAT v1. Returns the number of bytes written.
std::uint64_t write_featfile(const FeatureStore& store, std::ostream& out);
void write_featfile(const FeatureStore& store, const std::filesystem::path& path);

FeatureStore read_featfile(std::istream& in);
FeatureStore read_featfile(const std::filesystem::path& path);

/// MDPM-FEAT byte layout without store validation: only magic, version and
/// completeness are checked. Used for files whose payload is not a patch
/// activation (e.g. image encodings, which may be negative).
struct RawFeatFile {
  std::uint32_t dim = 0;
  std::vector<PatchRecord> records;
};
RawFeatFile read_featfile_raw(std::istream& in);
std::uint64_t write_featfile_raw(std::uint32_t dim, std::span<const PatchRecord> records,
                                 std::ostream& out);

/// All patch positions on a regular grid, row-major. Empty when the patch
/// does not fit.
std::vector<PatchGeometry> sample_patch_grid(std::uint32_t image_w,
                                             std::uint32_t image_h,
                                             std::uint32_t patch,
                                             std::uint32_t stride);

}  // namespace mdpm
