#include "mdpm/featstore.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "binary_io.hpp"
#include "mdpm/error.hpp"

namespace mdpm {

namespace {

constexpr std::array<unsigned char, 4> kMagic = {0x4D, 0x44, 0x50, 0x4D};
constexpr std::uint32_t kVersion = 1;

void validate_record(const PatchRecord& r, std::uint32_t dim, std::size_t pos) {
  if (r.activation.size() != dim) {
    throw ValidationError("record " + std::to_string(pos) + " has dimension " +
                          std::to_string(r.activation.size()) + ", store has " +
                          std::to_string(dim));
  }
  for (std::size_t j = 0; j < r.activation.size(); ++j) {
    float v = r.activation[j];
    if (!(v >= 0.0f) || !std::isfinite(v)) {
      throw ValidationError("record " + std::to_string(pos) +
                            " has negative or non-finite activation at " +
                            std::to_string(j));
    }
  }
  if (r.geometry.w == 0 || r.geometry.h == 0 || !(r.geometry.scale > 0.0f)) {
    throw ValidationError("record " + std::to_string(pos) +
                          " has degenerate geometry");
  }
}

}  // namespace

FeatureStore::FeatureStore(std::uint32_t dim) : dim_(dim) {
  if (dim == 0) throw ValidationError("feature dimension must be >= 1");
}

FeatureStore::FeatureStore(std::uint32_t dim, std::vector<PatchRecord> records)
    : FeatureStore(dim) {
  records_.reserve(records.size());
  for (auto& r : records) add(std::move(r));
}

void FeatureStore::add(PatchRecord record) {
  validate_record(record, dim_, records_.size());
  image_index_[record.image_id].push_back(records_.size());
  records_.push_back(std::move(record));
}

std::span<const std::size_t> FeatureStore::image_records(
    std::uint32_t image_id) const {
  auto it = image_index_.find(image_id);
  if (it == image_index_.end()) return {};
  return it->second;
}

std::uint64_t write_featfile_raw(std::uint32_t dim, std::span<const PatchRecord> records,
                                 std::ostream& out) {
  using detail::put_le;
  std::uint64_t written = 0;
  out.write(reinterpret_cast<const char*>(kMagic.data()), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, dim);
  put_le<std::uint64_t>(out, records.size());
  if (!out) throw IoError("failed writing feature header", written);
  written += kFeatHeaderBytes;

  for (const auto& r : records) {
    if (r.activation.size() != dim) {
      throw ValidationError("record length does not match the file dimension");
    }
    put_le<std::uint32_t>(out, r.image_id);
    put_le<std::int32_t>(out, r.class_label);
    put_le<std::uint16_t>(out, r.geometry.x);
    put_le<std::uint16_t>(out, r.geometry.y);
    put_le<std::uint16_t>(out, r.geometry.w);
    put_le<std::uint16_t>(out, r.geometry.h);
    put_le<float>(out, r.geometry.scale);
    for (float v : r.activation) put_le<float>(out, v);
    if (!out) throw IoError("failed writing feature record", written);
    written += feat_record_bytes(dim);
  }
  return written;
}

std::uint64_t write_featfile(const FeatureStore& store, std::ostream& out) {
  return write_featfile_raw(store.dim(), store.records(), out);
}

void write_featfile(const FeatureStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing", 0);
  write_featfile(store, out);
}

RawFeatFile read_featfile_raw(std::istream& in) {
  using detail::get_le;
  std::array<unsigned char, kFeatHeaderBytes> header{};
  if (detail::read_some(in, header.data(), header.size()) != header.size()) {
    throw FormatError("feature file shorter than its 20-byte header");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) {
    throw FormatError("bad magic: not an MDPM-FEAT file");
  }
  const auto version = get_le<std::uint32_t>(header.data() + 4);
  if (version != kVersion) {
    throw FormatError("unsupported MDPM-FEAT version " + std::to_string(version));
  }
  RawFeatFile file;
  file.dim = get_le<std::uint32_t>(header.data() + 8);
  const auto count = get_le<std::uint64_t>(header.data() + 12);
  if (file.dim == 0) throw FormatError("feature dimension is zero");

  std::vector<unsigned char> buf(feat_record_bytes(file.dim));
  for (std::uint64_t i = 0; i < count; ++i) {
    if (detail::read_some(in, buf.data(), buf.size()) != buf.size()) {
      throw TruncationError("feature file truncated", i);
    }
    const unsigned char* p = buf.data();
    PatchRecord r;
    r.image_id = get_le<std::uint32_t>(p);
    r.class_label = get_le<std::int32_t>(p + 4);
    r.geometry.x = get_le<std::uint16_t>(p + 8);
    r.geometry.y = get_le<std::uint16_t>(p + 10);
    r.geometry.w = get_le<std::uint16_t>(p + 12);
    r.geometry.h = get_le<std::uint16_t>(p + 14);
    r.geometry.scale = get_le<float>(p + 16);
    r.activation.resize(file.dim);
    for (std::uint32_t j = 0; j < file.dim; ++j) {
      r.activation[j] = get_le<float>(p + 20 + 4 * static_cast<std::size_t>(j));
    }
    file.records.push_back(std::move(r));
  }
  return file;
}

FeatureStore read_featfile(std::istream& in) {
  auto raw = read_featfile_raw(in);
  return FeatureStore(raw.dim, std::move(raw.records));
}

FeatureStore read_featfile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string(), 0);
  return read_featfile(in);
}

std::vector<PatchGeometry> sample_patch_grid(std::uint32_t image_w,
                                             std::uint32_t image_h,
                                             std::uint32_t patch,
                                             std::uint32_t stride) {
  if (stride == 0) throw ValidationError("stride must be >= 1");
  std::vector<PatchGeometry> out;
  if (patch == 0 || patch > image_w || patch > image_h) return out;
  if (image_w > 65535 || image_h > 65535) {
    throw ValidationError("image side exceeds the 16-bit geometry range");
  }
  for (std::uint32_t y = 0; y + patch <= image_h; y += stride) {
    for (std::uint32_t x = 0; x + patch <= image_w; x += stride) {
      out.push_back({static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                     static_cast<std::uint16_t>(patch),
                     static_cast<std::uint16_t>(patch), 1.0f});
    }
  }
  return out;
}

}  // namespace mdpm
