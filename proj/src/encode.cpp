#include "mdpm/encode.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "mdpm/error.hpp"

namespace mdpm {

std::size_t PyramidLayout::cell_count() const {
  std::size_t n = 0;
  for (const auto& g : levels) n += static_cast<std::size_t>(g.rows) * g.cols;
  return n;
}

PyramidLayout PyramidLayout::parse(const std::string& text) {
  PyramidLayout layout;
  layout.levels.clear();
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '+')) {
    const auto x = part.find('x');
    if (x == std::string::npos) throw ValidationError("bad pyramid level '" + part + "'");
    try {
      const auto rows = std::stoul(part.substr(0, x));
      const auto cols = std::stoul(part.substr(x + 1));
      if (rows == 0 || cols == 0) throw ValidationError("pyramid level must be non-empty");
      layout.levels.push_back({static_cast<std::uint32_t>(rows), static_cast<std::uint32_t>(cols)});
    } catch (const std::logic_error&) {
      throw ValidationError("bad pyramid level '" + part + "'");
    }
  }
  if (layout.levels.empty()) throw ValidationError("pyramid has no levels");
  return layout;
}

std::vector<std::size_t> pyramid_cell_of(const PatchGeometry& geometry,
                                         std::uint32_t image_w, std::uint32_t image_h,
                                         const PyramidLayout& layout) {
  const double cx = geometry.x + geometry.w / 2.0;
  const double cy = geometry.y + geometry.h / 2.0;
  if (image_w == 0 || image_h == 0 || cx > image_w || cy > image_h) {
    throw ValidationError("patch center lies outside the image");
  }
  std::vector<std::size_t> cells;
  std::size_t offset = 0;
  for (const auto& g : layout.levels) {
    auto col = static_cast<std::size_t>(std::floor(cx * g.cols / image_w));
    auto row = static_cast<std::size_t>(std::floor(cy * g.rows / image_h));
    col = std::min<std::size_t>(col, g.cols - 1);
    row = std::min<std::size_t>(row, g.rows - 1);
    cells.push_back(offset + row * g.cols + col);
    offset += static_cast<std::size_t>(g.rows) * g.cols;
  }
  return cells;
}

namespace {

// Derives X and Y from a category-major column list.
template <typename CategoryOf>
std::pair<std::size_t, std::size_t> column_shape(std::size_t n, CategoryOf category_of) {
  if (n == 0) return {0, 0};
  std::vector<std::size_t> runs{1};
  for (std::size_t i = 1; i < n; ++i) {
    if (category_of(i) == category_of(i - 1)) {
      ++runs.back();
    } else {
      runs.push_back(1);
    }
  }
  for (auto r : runs) {
    if (r != runs.front()) {
      throw ValidationError("encoders need the same number of columns per category, "
                            "grouped by category");
    }
  }
  return {runs.front(), runs.size()};
}

}  // namespace

ImageEncoding bop_counts(std::span<const PatchView> patches,
                         std::span<const Pattern> patterns, std::uint32_t image_w,
                         std::uint32_t image_h, const PyramidLayout& layout) {
  ImageEncoding enc;
  std::tie(enc.per_category, enc.categories) =
      column_shape(patterns.size(), [&](std::size_t i) { return patterns[i].category; });
  enc.cells = layout.cell_count();
  const std::size_t columns = patterns.size();
  enc.values.assign(columns * enc.cells, 0.0);

  for (const auto& patch : patches) {
    const auto cells = pyramid_cell_of(patch.geometry, image_w, image_h, layout);
    for (std::size_t k = 0; k < columns; ++k) {
      bool inside = true;
      for (Item item : patterns[k].items) {
        if (item >= patch.activation.size() || !(patch.activation[item] > 0.0f)) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;
      for (auto c : cells) enc.values[c * columns + k] += 1.0;
    }
  }
  return enc;
}

ImageEncoding encode_bop(std::span<const PatchView> patches,
                         std::span<const Pattern> patterns, std::uint32_t image_w,
                         std::uint32_t image_h, const PyramidLayout& layout) {
  auto enc = bop_counts(patches, patterns, image_w, image_h, layout);
  const std::size_t columns = patterns.size();
  for (std::size_t c = 0; c < enc.cells; ++c) {
    double norm = 0.0;
    for (std::size_t k = 0; k < columns; ++k) norm += enc.values[c * columns + k] * enc.values[c * columns + k];
    if (norm == 0.0) continue;
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < columns; ++k) enc.values[c * columns + k] /= norm;
  }
  return enc;
}

ImageEncoding encode_boe(std::span<const ScaleInput> scales,
                         std::span<const Detector> detectors,
                         const PyramidLayout& layout) {
  if (scales.empty()) throw ValidationError("BoE encoding needs at least one scale");
  ImageEncoding enc;
  std::tie(enc.per_category, enc.categories) =
      column_shape(detectors.size(), [&](std::size_t i) { return detectors[i].category; });
  enc.cells = layout.cell_count();
  const std::size_t columns = detectors.size();

  std::vector<Eigen::VectorXd> unit(columns);
  for (std::size_t k = 0; k < columns; ++k) {
    const double n = detectors[k].weights.norm();
    unit[k] = n > 0.0 ? Eigen::VectorXd(detectors[k].weights / n) : detectors[k].weights;
  }

  constexpr double kNone = -std::numeric_limits<double>::infinity();
  enc.values.assign(columns * enc.cells, kNone);
  std::vector<double> scores(columns);
  for (const auto& scale : scales) {
    for (const auto& patch : scale.patches) {
      const auto cells = pyramid_cell_of(patch.geometry, scale.image_w, scale.image_h, layout);
      for (std::size_t k = 0; k < columns; ++k) {
        if (static_cast<Eigen::Index>(patch.activation.size()) != unit[k].size()) {
          throw ValidationError("detector and activation dimensions differ");
        }
        double s = 0.0;
        for (std::size_t j = 0; j < patch.activation.size(); ++j) {
          s += unit[k][static_cast<Eigen::Index>(j)] * patch.activation[j];
        }
        scores[k] = s;
      }
      for (auto c : cells) {
        for (std::size_t k = 0; k < columns; ++k) {
          auto& slot = enc.values[c * columns + k];
          slot = std::max(slot, scores[k]);
        }
      }
    }
  }
  for (auto& v : enc.values) {
    if (v == kNone) v = 0.0;
  }
  return enc;
}

std::vector<double> default_scale_factors(std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::pow(2.0, -0.5 * static_cast<double>(i)));
  return out;
}

void write_encodings(std::span<const EncodedImage> images, std::ostream& out) {
  const std::uint32_t dim = images.empty() ? 1 : static_cast<std::uint32_t>(images[0].values.size());
  std::vector<PatchRecord> records;
  records.reserve(images.size());
  for (const auto& img : images) {
    if (img.values.size() != dim) throw ValidationError("encodings differ in length");
    PatchRecord r;
    r.image_id = img.image_id;
    r.class_label = img.label;
    r.geometry = PatchGeometry{0, 0, 0, 0, 0.0f};
    r.activation.assign(img.values.begin(), img.values.end());
    records.push_back(std::move(r));
  }
  write_featfile_raw(dim, records, out);
}

std::vector<EncodedImage> read_encodings(std::istream& in) {
  auto raw = read_featfile_raw(in);
  std::vector<EncodedImage> out;
  out.reserve(raw.records.size());
  for (auto& r : raw.records) {
    EncodedImage img;
    img.image_id = r.image_id;
    img.label = r.class_label;
    img.values.assign(r.activation.begin(), r.activation.end());
    for (double v : img.values) {
      if (!std::isfinite(v)) throw ValidationError("non-finite value in encoding file");
    }
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace mdpm
