#include "mdpm/pipeline.hpp"

#include <algorithm>
#include <map>

#include "mdpm/error.hpp"
#include "parallel.hpp"

namespace mdpm {

std::vector<std::int32_t> store_categories(const FeatureStore& store) {
  std::vector<std::int32_t> cats;
  for (const auto& r : store.records()) {
    if (r.class_label >= 0) cats.push_back(r.class_label);
  }
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  return cats;
}

std::vector<Pattern> mine_category(const FeatureStore& store, std::uint32_t k,
                                   std::int32_t target, MiningConfig cfg) {
  const auto db = build_database(store, k, target, cfg.workers);
  cfg.consequent = db.pos_item();
  cfg.category = target;
  return mine_rules(db, cfg);
}

std::vector<MidLevelElement> retrieve_category(const FeatureStore& store, std::uint32_t k,
                                               std::int32_t target,
                                               std::span<const Pattern> patterns,
                                               unsigned workers) {
  const auto db = build_database(store, k, target, workers);
  const auto index = build_inverted_index(db);
  std::vector<MidLevelElement> out(patterns.size());
  detail::parallel_chunks(patterns.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = retrieve_element(patterns[i], index, db, store);
  });
  return out;
}

Extent patch_extent(const FeatureStore& store, std::span<const std::size_t> positions) {
  Extent e;
  for (auto pos : positions) {
    const auto& g = store[pos].geometry;
    e.width = std::max<std::uint32_t>(e.width, std::uint32_t{g.x} + g.w);
    e.height = std::max<std::uint32_t>(e.height, std::uint32_t{g.y} + g.h);
  }
  return e;
}

namespace {

std::vector<PatchView> views_of(const FeatureStore& store, std::span<const std::size_t> positions) {
  std::vector<PatchView> views;
  views.reserve(positions.size());
  for (auto pos : positions) views.push_back({store[pos].activation, store[pos].geometry});
  return views;
}

Extent resolve_extent(const FeatureStore& store, std::span<const std::size_t> positions,
                      Extent fixed) {
  return fixed.width != 0 && fixed.height != 0 ? fixed : patch_extent(store, positions);
}

std::int32_t image_label(const FeatureStore& store, std::uint32_t image_id,
                         std::span<const std::size_t> positions) {
  const auto label = store[positions.front()].class_label;
  for (auto pos : positions) {
    if (store[pos].class_label != label) {
      throw ValidationError("records of image " + std::to_string(image_id) +
                            " carry different labels");
    }
  }
  return label;
}

}  // namespace

std::vector<EncodedImage> encode_store_bop(const FeatureStore& store,
                                           std::span<const Pattern> patterns,
                                           const PyramidLayout& layout, Extent fixed,
                                           unsigned workers) {
  std::vector<std::pair<std::uint32_t, const std::vector<std::size_t>*>> images;
  for (const auto& [id, positions] : store.image_index()) images.emplace_back(id, &positions);
  std::vector<EncodedImage> out(images.size());
  detail::parallel_chunks(images.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& positions = *images[i].second;
      const auto views = views_of(store, positions);
      const auto extent = resolve_extent(store, positions, fixed);
      out[i].image_id = images[i].first;
      out[i].label = image_label(store, images[i].first, positions);
      out[i].values =
          encode_bop(views, patterns, extent.width, extent.height, layout).values;
    }
  });
  return out;
}

std::vector<EncodedImage> encode_store_boe(std::span<const FeatureStore* const> scales,
                                           std::span<const Detector> detectors,
                                           const PyramidLayout& layout, Extent fixed,
                                           unsigned workers) {
  if (scales.empty()) throw ValidationError("BoE encoding needs at least one scale");
  // Image id -> label, across all scales.
  std::map<std::uint32_t, std::int32_t> labels;
  for (const auto* store : scales) {
    for (const auto& [id, positions] : store->image_index()) {
      const auto label = image_label(*store, id, positions);
      auto [it, inserted] = labels.emplace(id, label);
      if (!inserted && it->second != label) {
        throw ValidationError("image " + std::to_string(id) + " has different labels across scales");
      }
    }
  }
  std::vector<std::pair<std::uint32_t, std::int32_t>> images(labels.begin(), labels.end());
  std::vector<EncodedImage> out(images.size());
  detail::parallel_chunks(images.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      std::vector<std::vector<PatchView>> views;
      std::vector<ScaleInput> inputs;
      views.reserve(scales.size());
      for (const auto* store : scales) {
        const auto positions = store->image_records(images[i].first);
        if (positions.empty()) continue;
        views.push_back(views_of(*store, positions));
        const auto extent = resolve_extent(*store, positions, fixed);
        inputs.push_back({views.back(), extent.width, extent.height});
      }
      out[i].image_id = images[i].first;
      out[i].label = images[i].second;
      out[i].values = encode_boe(inputs, detectors, layout).values;
    }
  });
  return out;
}

}  // namespace mdpm
