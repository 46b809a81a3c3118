#include "mdpm/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "mdpm/error.hpp"

namespace mdpm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::uint64_t kLayoutSalt = 0x6C61796F7574ULL;  // "layout"

std::vector<Item> distinct_items(Stream& rng, std::uint32_t universe, std::uint32_t count) {
  std::vector<Item> pool(universe);
  for (Item i = 0; i < universe; ++i) pool[i] = i;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.below(universe - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

void SynthSpec::validate() const {
  if (dim == 0) throw ValidationError("dim must be >= 1");
  if (categories == 0) throw ValidationError("categories must be >= 1");
  if (concepts_per_category == 0) throw ValidationError("concepts_per_category must be >= 1");
  if (items_per_concept == 0 || items_per_concept > dim) {
    throw ValidationError("items_per_concept must be in [1, dim]");
  }
  if (!(p_plant > 0.0 && p_plant <= 1.0)) throw ValidationError("p_plant must be in (0,1]");
  if (!(p_leak >= 0.0 && p_leak < p_plant)) throw ValidationError("p_leak must be in [0, p_plant)");
  if (!(signal > 0.0)) throw ValidationError("signal must be positive");
  if (!(noise_spread >= 0.0)) throw ValidationError("noise_spread must be non-negative");
  if (!(noise_density >= 0.0 && noise_density <= 1.0)) {
    throw ValidationError("noise_density must be in [0,1]");
  }
  if (patch == 0 || patch > image_size) throw ValidationError("patch must fit the image");
  if (stride == 0) throw ValidationError("stride must be >= 1");
}

SynthSpec SynthSpec::parse(std::istream& in) {
  SynthSpec s;
  std::map<std::string, std::function<void(const std::string&)>> setters;
  auto u32 = [](std::uint32_t& f) { return [&f](const std::string& v) { f = static_cast<std::uint32_t>(std::stoul(v)); }; };
  auto u64 = [](std::uint64_t& f) { return [&f](const std::string& v) { f = std::stoull(v); }; };
  auto real = [](double& f) { return [&f](const std::string& v) { f = std::stod(v); }; };
  setters["dim"] = u32(s.dim);
  setters["categories"] = u32(s.categories);
  setters["images_per_category"] = u32(s.images_per_category);
  setters["patches_per_image"] = u32(s.patches_per_image);
  setters["concepts_per_category"] = u32(s.concepts_per_category);
  setters["items_per_concept"] = u32(s.items_per_concept);
  setters["signal"] = real(s.signal);
  setters["noise_spread"] = real(s.noise_spread);
  setters["noise_density"] = real(s.noise_density);
  setters["p_plant"] = real(s.p_plant);
  setters["p_leak"] = real(s.p_leak);
  setters["background_images"] = u32(s.background_images);
  setters["seed"] = u64(s.seed);
  setters["layout_seed"] = u64(s.layout_seed);
  setters["image_size"] = u32(s.image_size);
  setters["patch"] = u32(s.patch);
  setters["stride"] = u32(s.stride);
  setters["mining_k"] = u32(s.mining_k);

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      return t.substr(b, t.find_last_not_of(" \t\r") - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) {
      throw ValidationError("spec line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ValidationError("spec line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const std::logic_error&) {
      throw ValidationError("spec line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  s.validate();
  return s;
}

SynthDataset generate_dataset(const SynthSpec& spec) {
  spec.validate();
  SynthDataset data;
  data.store = FeatureStore(spec.dim);
  data.concepts_per_category = spec.concepts_per_category;

  const std::uint32_t total_concepts = spec.categories * spec.concepts_per_category;
  const std::uint32_t m = spec.items_per_concept;
  Stream layout(splitmix64(spec.layout_seed ^ kLayoutSalt));
  if (static_cast<std::uint64_t>(total_concepts) * m <= spec.dim) {
    const auto items = distinct_items(layout, spec.dim, total_concepts * m);
    for (std::uint32_t c = 0; c < total_concepts; ++c) {
      data.concepts.emplace_back(std::vector<Item>(items.begin() + c * m, items.begin() + (c + 1) * m));
    }
  } else {
    data.warnings.push_back("concepts overlap: categories*concepts*items exceeds dim");
    for (std::uint32_t c = 0; c < total_concepts; ++c) {
      data.concepts.emplace_back(distinct_items(layout, spec.dim, m));
    }
  }
  if (m > spec.mining_k) {
    data.warnings.push_back("items_per_concept exceeds the intended transaction length K; "
                            "concepts cannot fit inside one transaction");
  }
  if (spec.noise_spread > 0.0 && spec.signal < 6.0 * spec.noise_spread) {
    data.warnings.push_back("signal below 6x noise spread; planted items may fall out of the top-K");
  }

  const auto grid = sample_patch_grid(spec.image_size, spec.image_size, spec.patch, spec.stride);
  const std::uint32_t images = spec.categories * spec.images_per_category + spec.background_images;
  for (std::uint32_t image = 0; image < images; ++image) {
    Stream rng(splitmix64(spec.seed ^ splitmix64(image)));
    const bool background = image >= spec.categories * spec.images_per_category;
    const std::int32_t label =
        background ? kBackgroundLabel : static_cast<std::int32_t>(image / spec.images_per_category);

    for (std::uint32_t p = 0; p < spec.patches_per_image; ++p) {
      std::int32_t planted = -1;
      if (!background) {
        const auto own = static_cast<std::uint32_t>(label);
        if (rng.uniform() < spec.p_plant) {
          planted = static_cast<std::int32_t>(own * spec.concepts_per_category +
                                              rng.below(spec.concepts_per_category));
        } else if (spec.categories > 1 && rng.uniform() < spec.p_leak) {
          const auto foreign = total_concepts - spec.concepts_per_category;
          auto pick = static_cast<std::uint32_t>(rng.below(foreign));
          if (pick >= own * spec.concepts_per_category) pick += spec.concepts_per_category;
          planted = static_cast<std::int32_t>(pick);
        }
      }

      PatchRecord r;
      r.image_id = image;
      r.class_label = label;
      r.geometry = grid[p % grid.size()];
      r.activation.assign(spec.dim, 0.0f);
      for (std::uint32_t j = 0; j < spec.dim; ++j) {
        if (rng.uniform() < spec.noise_density) {
          r.activation[j] = static_cast<float>(std::abs(rng.normal()) * spec.noise_spread);
        }
      }
      if (planted >= 0) {
        for (Item i : data.concepts[static_cast<std::size_t>(planted)]) {
          r.activation[i] = static_cast<float>(spec.signal + std::abs(rng.normal()) * spec.noise_spread);
        }
      }
      data.store.add(std::move(r));
      data.record_concept.push_back(planted);
    }
  }
  return data;
}

void write_ground_truth(const SynthDataset& data, std::ostream& out) {
  for (std::size_t c = 0; c < data.concepts.size(); ++c) {
    out << "{\"concept\":" << c << ",\"category\":" << data.concept_category(c) << ",\"items\":[";
    const auto& items = data.concepts[c];
    for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "," : "") << items[i];
    out << "]}\n";
  }
  out << "{\"record_concept\":[";
  for (std::size_t r = 0; r < data.record_concept.size(); ++r) {
    out << (r ? "," : "") << data.record_concept[r];
  }
  out << "]}\n";
}

std::int32_t matching_concept(const ItemSet& items, std::span<const ItemSet> truth) {
  if (items.size() < 2) return -1;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    if (items.subset_of(truth[c])) return static_cast<std::int32_t>(c);
  }
  return -1;
}

RecoveryReport planted_recovery_report(std::span<const Pattern> mined,
                                       std::span<const ItemSet> truth) {
  RecoveryReport report;
  report.concept_hit.assign(truth.size(), false);
  std::size_t matched = 0;
  for (const auto& p : mined) {
    bool any = false;
    if (p.items.size() >= 2) {
      for (std::size_t c = 0; c < truth.size(); ++c) {
        if (p.items.subset_of(truth[c])) {
          report.concept_hit[c] = true;
          any = true;
        }
      }
    }
    matched += any ? 1 : 0;
  }
  report.no_patterns = mined.empty();
  report.precision = mined.empty() ? 1.0 : static_cast<double>(matched) / static_cast<double>(mined.size());
  const auto hits = std::count(report.concept_hit.begin(), report.concept_hit.end(), true);
  report.recall = truth.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  return report;
}

double calibrate_merge_threshold(std::span<const MidLevelElement> elements,
                                 std::span<const std::int32_t> group_of,
                                 const FeatureStore& store, const BackgroundStats& stats) {
  if (elements.size() != group_of.size()) throw ValidationError("one group per element required");
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::VectorXd> detectors;
  for (const auto& e : elements) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(store.dim());
    for (auto pos : e.members) {
      for (std::uint32_t j = 0; j < store.dim(); ++j) mean[j] += store[pos].activation[j];
    }
    means.push_back(mean / static_cast<double>(e.members.size()));
    detectors.push_back(train_lda(store, e.members, stats).weights);
  }
  double within = 0.0, cross = 0.0;
  std::size_t nw = 0, nc = 0;
  for (std::size_t a = 0; a < elements.size(); ++a) {
    if (group_of[a] < 0) continue;
    for (std::size_t b = 0; b < elements.size(); ++b) {
      if (group_of[b] < 0) continue;
      const double s = detectors[a].dot(means[b]);
      if (group_of[a] == group_of[b]) {
        within += s;
        ++nw;
      } else {
        cross += s;
        ++nc;
      }
    }
  }
  if (nw == 0 || nc == 0) {
    throw ValidationError("calibration needs at least two groups of elements");
  }
  return 0.5 * (within / static_cast<double>(nw) + cross / static_cast<double>(nc));
}

double jaccard(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) /
         static_cast<double>(a.size() + b.size() - common.size());
}

TransactionDatabase generate_bench_database(const BenchSpec& spec) {
  if (spec.k == 0 || spec.k > spec.dim) throw ValidationError("bench k must be in [1, dim]");
  if (spec.concept_size > spec.k) throw ValidationError("bench concept_size must be <= k");
  Stream rng(splitmix64(spec.seed));

  // Popularity by rank, scattered over item ids.
  const auto scatter = distinct_items(rng, spec.dim, spec.dim);
  std::vector<double> cumulative(spec.dim);
  double acc = 0.0;
  for (std::uint32_t r = 0; r < spec.dim; ++r) {
    acc += std::pow(static_cast<double>(r + 1), -spec.skew);
    cumulative[r] = acc;
  }
  std::vector<std::vector<Item>> concepts;
  for (std::uint32_t c = 0; c < spec.concepts; ++c) {
    concepts.push_back(distinct_items(rng, spec.dim, spec.concept_size));
  }

  TransactionDatabase db(spec.dim, spec.k);
  std::vector<char> used(spec.dim, 0);
  std::vector<Item> items;
  for (std::size_t t = 0; t < spec.transactions; ++t) {
    const bool pos = rng.uniform() < spec.pos_fraction;
    items.clear();
    const double rate = pos ? spec.concept_rate_pos : spec.concept_rate_neg;
    if (!concepts.empty() && rng.uniform() < rate) {
      for (Item i : concepts[rng.below(concepts.size())]) items.push_back(i);
    }
    for (Item i : items) used[i] = 1;
    while (items.size() < spec.k) {
      const double u = rng.uniform() * acc;
      const auto r = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      const Item item = scatter[std::min<std::size_t>(r, spec.dim - 1)];
      if (used[item]) continue;
      used[item] = 1;
      items.push_back(item);
    }
    for (Item i : items) used[i] = 0;
    db.add({ItemSet(items), pos ? db.pos_item() : db.neg_item()});
  }
  return db;
}

}  // namespace mdpm
