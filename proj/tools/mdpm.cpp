// mdpm: batch front end for the mid-level pattern pipeline.
//
//   synth → mine → retrieve → select → merge → encode-bop / encode-boe
//   → train → eval, plus context analysis and a mining benchmark.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error.
// Results go to files (written atomically) or stdout; diagnostics to stderr.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdpm/context.hpp"
#include "mdpm/elements.hpp"
#include "mdpm/encode.hpp"
#include "mdpm/error.hpp"
#include "mdpm/featstore.hpp"
#include "mdpm/io.hpp"
#include "mdpm/lda.hpp"
#include "mdpm/learn.hpp"
#include "mdpm/miner.hpp"
#include "mdpm/pipeline.hpp"
#include "mdpm/synthgen.hpp"
#include "mdpm/transact.hpp"

namespace fs = std::filesystem;
using namespace mdpm;

namespace {

/// Bad flags or missing arguments: exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void note(const std::string& msg) { std::cerr << "mdpm: " << msg << '\n'; }

std::ifstream open_input(const fs::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open " + path.string(), 0);
  return in;
}

Fraction parse_fraction(const std::string& flag, const std::string& text) {
  Fraction f;
  try {
    f = Fraction::parse(text);
  } catch (const ValidationError&) {
    throw UsageError(flag + " must be in (0,1]");
  }
  if (f.num == 0 || f.num > f.den) throw UsageError(flag + " must be in (0,1]");
  return f;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || !(v > 0.0)) throw UsageError("reg-grid entries must be positive numbers");
    grid.push_back(v);
  }
  if (grid.empty()) throw UsageError("reg-grid must not be empty");
  return grid;
}

PyramidLayout parse_pyramid(const std::string& text) {
  try {
    return PyramidLayout::parse(text);
  } catch (const ValidationError& e) {
    throw UsageError(std::string("pyramid: ") + e.what());
  }
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw UsageError(flag + " is required");
}

template <class T>
std::map<std::int32_t, std::vector<T>> by_category(const std::vector<T>& items,
                                                   std::int32_t (*category_of)(const T&)) {
  std::map<std::int32_t, std::vector<T>> groups;
  for (const auto& it : items) groups[category_of(it)].push_back(it);
  return groups;
}

std::int32_t pattern_category(const Pattern& p) { return p.category; }
std::int32_t element_category(const MidLevelElement& e) { return e.pattern.category; }
std::int32_t detector_category(const Detector& d) { return d.category; }

/// Keeps the first `per` entries of every category, where `per` is top_x or
/// the size of the smallest category if that is smaller.
template <class T>
std::vector<T> equalize(const std::map<std::int32_t, std::vector<T>>& groups, std::uint32_t top_x,
                        const char* what) {
  if (groups.empty()) throw EmptyInputError(std::string("no ") + what + " to encode with");
  std::size_t per = top_x;
  for (const auto& [c, g] : groups) per = std::min(per, g.size());
  if (per < top_x) {
    note("using " + std::to_string(per) + " " + what + " per category (fewest available)");
  }
  std::vector<T> out;
  for (const auto& [c, g] : groups) out.insert(out.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(per));
  return out;
}

std::vector<MidLevelElement> read_elements_file(const fs::path& path) {
  auto in = open_input(path);
  return read_elements(in);
}

// ---------------------------------------------------------------------------
// --config: "key = value" lines become flags unless given on the command line.

std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!config) return args;
  std::ifstream in(*config);
  if (!in) throw UsageError("cannot read config file " + *config);
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(*config + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (!given(flag)) {
      extra.push_back(flag);
      extra.push_back(trim(line.substr(eq + 1)));
    }
  }
  // Options follow the subcommand name (args[0]).
  if (args.empty()) throw UsageError("missing subcommand");
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Common {
  unsigned workers = 0;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--workers", c.workers, "Worker threads (0 = auto)")->capture_default_str();
  sub->add_option("--seed", c.seed, "Seed for every stochastic stage")->capture_default_str();
}

struct SynthArgs {
  Common common;
  std::string spec, out, truth;
};

int run_synth(const SynthArgs& a, const CLI::App& sub) {
  require(a.out, "--out");
  SynthSpec spec;
  if (!a.spec.empty()) {
    auto in = open_input(a.spec);
    spec = SynthSpec::parse(in);
  }
  if (sub.count("--seed")) spec.seed = a.common.seed;
  spec.validate();
  const auto data = generate_dataset(spec);
  for (const auto& w : data.warnings) note("warning: " + w);
  write_atomically(a.out, [&](std::ostream& os) { write_featfile(data.store, os); });
  if (!a.truth.empty()) {
    write_atomically(a.truth, [&](std::ostream& os) { write_ground_truth(data, os); }, false);
  }
  note("wrote " + std::to_string(data.store.size()) + " records of " +
       std::to_string(data.store.image_count()) + " images to " + a.out);
  return 0;
}

struct MineArgs {
  Common common;
  std::string in, out = "patterns.jsonl";
  std::optional<std::int32_t> target;
  std::uint32_t k = 20;
  std::string supp_min = "0.0001", conf_min = "0.3";
  std::uint32_t min_len = 2, max_len = 8;
};

MiningConfig mining_config(const std::string& supp, const std::string& conf, std::uint32_t min_len,
                           std::uint32_t max_len, unsigned workers) {
  MiningConfig cfg;
  cfg.supp_min = parse_fraction("supp-min", supp);
  cfg.conf_min = parse_fraction("conf-min", conf);
  if (min_len < 1) throw UsageError("min-len must be >= 1");
  if (max_len < min_len) throw UsageError("max-len must be >= min-len");
  cfg.min_len = min_len;
  cfg.max_len = max_len;
  cfg.workers = workers;
  return cfg;
}

int run_mine(const MineArgs& a) {
  const auto cfg = mining_config(a.supp_min, a.conf_min, a.min_len, a.max_len, a.common.workers);
  if (a.k < 1) throw UsageError("k must be >= 1");
  require(a.in, "--in");
  const auto store = read_featfile(fs::path(a.in));
  std::vector<std::int32_t> targets;
  if (a.target) {
    targets.push_back(*a.target);
  } else {
    targets = store_categories(store);
  }
  std::vector<Pattern> all;
  for (auto t : targets) {
    auto mined = mine_category(store, a.k, t, cfg);
    note("category " + std::to_string(t) + ": " + std::to_string(mined.size()) + " patterns");
    all.insert(all.end(), std::make_move_iterator(mined.begin()), std::make_move_iterator(mined.end()));
  }
  write_atomically(a.out, [&](std::ostream& os) { write_patterns(all, os); }, false);
  return 0;
}

struct RetrieveArgs {
  Common common;
  std::string in, patterns, out = "elements.jsonl";
  std::uint32_t k = 20;
};

int run_retrieve(const RetrieveArgs& a) {
  if (a.k < 1) throw UsageError("k must be >= 1");
  require(a.in, "--in");
  require(a.patterns, "--patterns");
  const auto store = read_featfile(fs::path(a.in));
  auto pin = open_input(a.patterns);
  const auto patterns = read_patterns(pin);
  std::vector<MidLevelElement> all;
  for (const auto& [c, group] : by_category(patterns, pattern_category)) {
    auto es = retrieve_category(store, a.k, c, group, a.common.workers);
    all.insert(all.end(), std::make_move_iterator(es.begin()), std::make_move_iterator(es.end()));
  }
  write_atomically(a.out, [&](std::ostream& os) { write_elements(all, os); }, false);
  note("retrieved " + std::to_string(all.size()) + " elements");
  return 0;
}

struct SelectArgs {
  Common common;
  std::string elements, out = "selected.jsonl";
  std::uint32_t top_x = 50;
};

int run_select(const SelectArgs& a) {
  if (a.top_x < 1) throw UsageError("top-x must be >= 1");
  require(a.elements, "--elements");
  const auto elements = read_elements_file(a.elements);
  std::vector<MidLevelElement> all;
  for (const auto& [c, group] : by_category(elements, element_category)) {
    auto top = select_top_patterns(group, a.top_x);
    all.insert(all.end(), std::make_move_iterator(top.begin()), std::make_move_iterator(top.end()));
  }
  write_atomically(a.out, [&](std::ostream& os) { write_elements(all, os); }, false);
  return 0;
}

struct MergeArgs {
  Common common;
  std::string in, elements, out = "merged.jsonl", detectors = "detectors.bin";
  std::optional<double> threshold;
  double shrinkage = kDefaultShrinkage;
};

int run_merge(const MergeArgs& a) {
  if (!a.threshold) throw UsageError("--threshold is required");
  if (!(a.shrinkage >= 0.0)) throw UsageError("shrinkage must be >= 0");
  require(a.in, "--in");
  require(a.elements, "--elements");
  const auto store = read_featfile(fs::path(a.in));
  const auto elements = read_elements_file(a.elements);
  std::map<std::int32_t, std::vector<std::size_t>> index;  // category -> input positions
  for (std::size_t i = 0; i < elements.size(); ++i) index[elements[i].pattern.category].push_back(i);
  std::vector<MergedElement> merged;
  std::vector<Detector> detectors;
  for (const auto& [c, positions] : index) {
    std::vector<MidLevelElement> group;
    for (auto p : positions) group.push_back(elements[p]);
    const auto stats = estimate_background(store, background_positions(store, c), a.shrinkage);
    auto result = ensemble_merge(group, store, stats, *a.threshold, a.common.workers);
    // Report sources as positions in the input file.
    for (auto& m : result.elements) {
      for (auto& s : m.sources) s = positions[s];
    }
    for (auto& d : result.detectors) {
      for (auto& s : d.source_element_ids) s = positions[s];
    }
    note("category " + std::to_string(c) + ": " + std::to_string(group.size()) + " elements -> " +
         std::to_string(result.elements.size()) + " merged");
    merged.insert(merged.end(), result.elements.begin(), result.elements.end());
    detectors.insert(detectors.end(), result.detectors.begin(), result.detectors.end());
  }
  write_atomically(a.out, [&](std::ostream& os) { write_merged(merged, os); }, false);
  write_atomically(a.detectors, [&](std::ostream& os) { write_detectors(detectors, os); });
  return 0;
}

struct EncodeArgs {
  Common common;
  std::vector<std::string> in;
  std::string elements, patterns, detectors, out = "encodings.bin";
  std::uint32_t top_x = 50;
  std::string pyramid = "1x1+2x2";
  std::uint32_t image_width = 0, image_height = 0;
};

Extent fixed_extent(const EncodeArgs& a) {
  if ((a.image_width == 0) != (a.image_height == 0)) {
    throw UsageError("give both image-width and image-height, or neither");
  }
  return {a.image_width, a.image_height};
}

void write_encoded(const std::string& path, const std::vector<EncodedImage>& images) {
  write_atomically(path, [&](std::ostream& os) { write_encodings(images, os); });
  note("encoded " + std::to_string(images.size()) + " images, length " +
       std::to_string(images.empty() ? 0 : images[0].values.size()));
}

int run_encode_bop(const EncodeArgs& a) {
  const auto layout = parse_pyramid(a.pyramid);
  const auto extent = fixed_extent(a);
  if (a.top_x < 1) throw UsageError("top-x must be >= 1");
  if (a.in.size() != 1) throw UsageError("--in takes exactly one feature file");
  if (a.elements.empty() == a.patterns.empty()) {
    throw UsageError("give exactly one of --elements or --patterns");
  }
  const auto store = read_featfile(fs::path(a.in[0]));
  std::vector<Pattern> patterns;
  if (!a.elements.empty()) {
    for (const auto& e : read_elements_file(a.elements)) patterns.push_back(e.pattern);
  } else {
    auto pin = open_input(a.patterns);
    patterns = read_patterns(pin);
  }
  const auto chosen = equalize(by_category(patterns, pattern_category), a.top_x, "patterns");
  write_encoded(a.out, encode_store_bop(store, chosen, layout, extent, a.common.workers));
  return 0;
}

int run_encode_boe(const EncodeArgs& a) {
  const auto layout = parse_pyramid(a.pyramid);
  const auto extent = fixed_extent(a);
  if (a.top_x < 1) throw UsageError("top-x must be >= 1");
  if (a.in.empty()) throw UsageError("--in is required (one feature file per scale)");
  require(a.detectors, "--detectors");
  std::vector<FeatureStore> stores;
  for (const auto& p : a.in) stores.push_back(read_featfile(fs::path(p)));
  std::vector<const FeatureStore*> scales;
  for (const auto& s : stores) scales.push_back(&s);
  auto din = open_input(a.detectors, true);
  const auto bank = read_detectors(din);
  const auto chosen = equalize(by_category(bank, detector_category), a.top_x, "detectors");
  write_encoded(a.out, encode_store_boe(scales, chosen, layout, extent, a.common.workers));
  return 0;
}

struct LearnArgs {
  Common common;
  std::string in, model = "model.txt", out;
  std::uint32_t folds = 5;
  std::string reg_grid = "0.01,0.1,1,10";
};

/// Splits encodings into vectors and labels; background images (negative
/// labels) are dropped unless keep_background.
void unpack(const std::vector<EncodedImage>& images, bool keep_background,
            std::vector<std::vector<double>>& x, std::vector<std::int32_t>& y) {
  for (const auto& img : images) {
    if (img.label < 0 && !keep_background) continue;
    x.push_back(img.values);
    y.push_back(img.label);
  }
}

std::vector<EncodedImage> read_encodings_file(const std::string& path) {
  auto in = open_input(path, true);
  return read_encodings(in);
}

int run_train(const LearnArgs& a) {
  SvmOptions opt;
  opt.reg_grid = parse_grid(a.reg_grid);
  if (a.folds < 2) throw UsageError("folds must be >= 2");
  opt.folds = a.folds;
  opt.seed = a.common.seed;
  opt.workers = a.common.workers;
  require(a.in, "--in");
  const auto images = read_encodings_file(a.in);
  std::vector<std::vector<double>> x;
  std::vector<std::int32_t> y;
  unpack(images, false, x, y);
  if (x.size() < images.size()) {
    note("skipped " + std::to_string(images.size() - x.size()) + " background images");
  }
  const auto model = train_ovr(x, y, opt);
  write_atomically(a.model, [&](std::ostream& os) { write_model(model, os); }, false);
  note("trained " + std::to_string(model.categories.size()) + " one-vs-rest separators on " +
       std::to_string(x.size()) + " images");
  return 0;
}

int run_eval(const LearnArgs& a) {
  require(a.in, "--in");
  require(a.model, "--model");
  auto min = open_input(a.model);
  const auto model = read_model(min);
  const auto images = read_encodings_file(a.in);
  std::vector<std::vector<double>> labeled_x, all_x;
  std::vector<std::int32_t> labeled_y, all_y;
  unpack(images, false, labeled_x, labeled_y);
  unpack(images, true, all_x, all_y);
  // Background images count as negatives for every category's ranking.
  const auto aps = per_category_ap(model, all_x, all_y);
  double mean = 0.0;
  std::ostringstream report;
  for (const auto& c : aps) {
    report << "{\"category\":" << c.category << ",\"ap\":" << format_real(c.ap) << "}\n";
    mean += c.ap;
  }
  if (!aps.empty()) mean /= static_cast<double>(aps.size());
  report << "{\"accuracy\":" << format_real(accuracy(model, labeled_x, labeled_y))
         << ",\"map\":" << format_real(mean) << ",\"images\":" << labeled_x.size() << "}\n";
  if (a.out.empty()) {
    std::cout << report.str();
  } else {
    write_atomically(a.out, [&](std::ostream& os) { os << report.str(); }, false);
  }
  return 0;
}

struct ContextArgs {
  Common common;
  std::string in, detectors, masks, out;
  double threshold = 0.0;
};

int run_context(const ContextArgs& a) {
  require(a.in, "--in");
  require(a.detectors, "--detectors");
  require(a.masks, "--masks");
  const auto store = read_featfile(fs::path(a.in));
  auto din = open_input(a.detectors, true);
  const auto bank = read_detectors(din);
  std::map<std::uint32_t, PixelMasks> masks;
  std::size_t unmasked = 0;
  for (const auto& [id, positions] : store.image_index()) {
    const fs::path p = fs::path(a.masks) / (std::to_string(id) + ".msk");
    if (!fs::exists(p)) {
      ++unmasked;
      continue;
    }
    auto in = open_input(p, true);
    masks.emplace(id, read_mask(in));
  }
  if (masks.empty()) throw EmptyInputError("no <image_id>.msk files found in " + a.masks);
  if (unmasked) note("skipping " + std::to_string(unmasked) + " images without a mask");
  std::vector<FiringType> types;
  for (const auto& d : bank) {
    if (static_cast<std::size_t>(d.weights.size()) != store.dim()) {
      throw ValidationError("detector length does not match the feature dimension");
    }
    std::vector<ImageDetections> per_image;
    for (const auto& [id, mask] : masks) {
      ImageDetections img{id, {}};
      for (auto pos : store.image_records(id)) {
        const auto& r = store[pos];
        const double s = d.score(r.activation);
        if (img.detections.empty() || s > img.detections[0].score) img.detections = {{r.geometry, s}};
      }
      per_image.push_back(std::move(img));
    }
    types.push_back(element_firing_type(per_image, masks, a.threshold));
  }
  if (a.out.empty()) {
    write_context_report(types, std::cout);
  } else {
    write_atomically(a.out, [&](std::ostream& os) { write_context_report(types, os); }, false);
  }
  return 0;
}

struct BenchArgs {
  Common common;
  std::size_t transactions = 200000;
  std::uint32_t dim = 4096, k = 20;
  std::string supp_min = "0.0001", conf_min = "0.3";
  std::uint32_t min_len = 2, max_len = 8;
  std::string out;
};

int run_bench(const BenchArgs& a) {
  auto cfg = mining_config(a.supp_min, a.conf_min, a.min_len, a.max_len, a.common.workers);
  if (a.transactions < 1 || a.dim < 1 || a.k < 1) throw UsageError("sizes must be >= 1");
  BenchSpec spec;
  spec.transactions = a.transactions;
  spec.dim = a.dim;
  spec.k = a.k;
  spec.seed = a.common.seed;
  const auto db = generate_bench_database(spec);
  cfg.consequent = db.pos_item();
  const auto t0 = std::chrono::steady_clock::now();
  const auto patterns = mine_rules(db, cfg);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream line;
  line << "{\"transactions\":" << db.size() << ",\"items\":" << db.item_universe()
       << ",\"patterns\":" << patterns.size() << ",\"seconds\":" << format_real(s) << "}\n";
  std::cout << line.str();
  if (!a.out.empty()) write_atomically(a.out, [&](std::ostream& os) { os << line.str(); }, false);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mid-level pattern mining: discover, merge and encode discriminative patterns", "mdpm"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Generate a planted-pattern feature file");
  s_synth->add_option("--spec", synth.spec, "key = value generator spec");
  s_synth->add_option("--out", synth.out, "Output feature file");
  s_synth->add_option("--truth", synth.truth, "Optional ground-truth sidecar (JSON lines)");
  add_common(s_synth, synth.common);

  MineArgs mine;
  auto* s_mine = app.add_subcommand("mine", "Mine class-discriminative patterns");
  s_mine->add_option("--in", mine.in, "Feature file");
  s_mine->add_option("--target", mine.target, "Category to mine (default: every category)");
  s_mine->add_option("--k", mine.k, "Transaction length")->capture_default_str();
  s_mine->add_option("--supp-min", mine.supp_min, "Minimum support (strict)")->capture_default_str();
  s_mine->add_option("--conf-min", mine.conf_min, "Minimum confidence (strict)")->capture_default_str();
  s_mine->add_option("--min-len", mine.min_len, "Shortest pattern")->capture_default_str();
  s_mine->add_option("--max-len", mine.max_len, "Longest pattern")->capture_default_str();
  s_mine->add_option("--out", mine.out, "Pattern file (JSON lines)")->capture_default_str();
  add_common(s_mine, mine.common);

  RetrieveArgs retrieve;
  auto* s_retrieve = app.add_subcommand("retrieve", "Collect the patches of each pattern");
  s_retrieve->add_option("--in", retrieve.in, "Feature file the patterns were mined from");
  s_retrieve->add_option("--patterns", retrieve.patterns, "Pattern file");
  s_retrieve->add_option("--k", retrieve.k, "Transaction length used for mining")->capture_default_str();
  s_retrieve->add_option("--out", retrieve.out, "Element file")->capture_default_str();
  add_common(s_retrieve, retrieve.common);

  SelectArgs select;
  auto* s_select = app.add_subcommand("select", "Keep the top-X elements per category by coverage");
  s_select->add_option("--elements", select.elements, "Element file");
  s_select->add_option("--top-x", select.top_x, "Elements kept per category")->capture_default_str();
  s_select->add_option("--out", select.out, "Selected element file")->capture_default_str();
  add_common(s_select, select.common);

  MergeArgs merge;
  auto* s_merge = app.add_subcommand("merge", "Merge redundant elements into LDA detectors");
  s_merge->add_option("--in", merge.in, "Feature file");
  s_merge->add_option("--elements", merge.elements, "Element file");
  s_merge->add_option("--threshold", merge.threshold, "Mean detector score needed to merge");
  s_merge->add_option("--shrinkage", merge.shrinkage, "Covariance shrinkage")->capture_default_str();
  s_merge->add_option("--out", merge.out, "Merged element file")->capture_default_str();
  s_merge->add_option("--detectors", merge.detectors, "Detector bank")->capture_default_str();
  add_common(s_merge, merge.common);

  EncodeArgs bop, boe;
  auto add_encode = [](CLI::App* sub, EncodeArgs& e) {
    sub->add_option("--top-x", e.top_x, "Columns per category")->capture_default_str();
    sub->add_option("--pyramid", e.pyramid, "Spatial pyramid, e.g. 1x1+2x2")->capture_default_str();
    sub->add_option("--image-width", e.image_width, "Image width (0 = patch extent)");
    sub->add_option("--image-height", e.image_height, "Image height (0 = patch extent)");
    sub->add_option("--out", e.out, "Encoding file")->capture_default_str();
    add_common(sub, e.common);
  };
  auto* s_bop = app.add_subcommand("encode-bop", "Bag-of-Patterns image encodings");
  s_bop->add_option("--in", bop.in, "Feature file");
  s_bop->add_option("--elements", bop.elements, "Element file (e.g. from select)");
  s_bop->add_option("--patterns", bop.patterns, "Pattern file");
  add_encode(s_bop, bop);
  auto* s_boe = app.add_subcommand("encode-boe", "Bag-of-Elements image encodings");
  s_boe->add_option("--in", boe.in, "Feature file per scale (repeatable)");
  s_boe->add_option("--detectors", boe.detectors, "Detector bank");
  add_encode(s_boe, boe);

  LearnArgs train, eval;
  auto* s_train = app.add_subcommand("train", "Train one-vs-rest linear SVMs");
  s_train->add_option("--in", train.in, "Encoding file");
  s_train->add_option("--model", train.model, "Output model")->capture_default_str();
  s_train->add_option("--folds", train.folds, "Cross-validation folds")->capture_default_str();
  s_train->add_option("--reg-grid", train.reg_grid, "Comma-separated regularization grid")->capture_default_str();
  add_common(s_train, train.common);
  auto* s_eval = app.add_subcommand("eval", "Accuracy and per-category average precision");
  s_eval->add_option("--in", eval.in, "Encoding file");
  s_eval->add_option("--model", eval.model, "Model file")->capture_default_str();
  s_eval->add_option("--out", eval.out, "Report file (default: stdout)");
  add_common(s_eval, eval.common);

  ContextArgs context;
  auto* s_context = app.add_subcommand("context", "Firing-type analysis of detectors");
  s_context->add_option("--in", context.in, "Feature file");
  s_context->add_option("--detectors", context.detectors, "Detector bank");
  s_context->add_option("--masks", context.masks, "Directory of <image_id>.msk files");
  s_context->add_option("--threshold", context.threshold, "Minimum detection score (strict)")->capture_default_str();
  s_context->add_option("--out", context.out, "Report file (default: stdout)");
  add_common(s_context, context.common);

  BenchArgs bench;
  auto* s_bench = app.add_subcommand("bench", "Time mining on a generated transaction database");
  s_bench->add_option("--transactions", bench.transactions, "Database size")->capture_default_str();
  s_bench->add_option("--dim", bench.dim, "Feature dimension")->capture_default_str();
  s_bench->add_option("--k", bench.k, "Items per transaction")->capture_default_str();
  s_bench->add_option("--supp-min", bench.supp_min, "Minimum support (strict)")->capture_default_str();
  s_bench->add_option("--conf-min", bench.conf_min, "Minimum confidence (strict)")->capture_default_str();
  s_bench->add_option("--min-len", bench.min_len, "Shortest pattern")->capture_default_str();
  s_bench->add_option("--max-len", bench.max_len, "Longest pattern")->capture_default_str();
  s_bench->add_option("--out", bench.out, "Also write the result line here");
  add_common(s_bench, bench.common);

  CLI::App* active = nullptr;
  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(args);
    for (auto* sub : app.get_subcommands()) active = sub;
    if (active == s_synth) return run_synth(synth, *s_synth);
    if (active == s_mine) return run_mine(mine);
    if (active == s_retrieve) return run_retrieve(retrieve);
    if (active == s_select) return run_select(select);
    if (active == s_merge) return run_merge(merge);
    if (active == s_bop) return run_encode_bop(bop);
    if (active == s_boe) return run_encode_boe(boe);
    if (active == s_train) return run_train(train);
    if (active == s_eval) return run_eval(eval);
    if (active == s_context) return run_context(context);
    if (active == s_bench) return run_bench(bench);
    return 1;
  } catch (const CLI::CallForHelp&) {
    std::cout << (active ? active->help("mdpm") : app.help());
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return 0;
    }
    note(e.what());
    for (auto* sub : app.get_subcommands()) active = sub;
    std::cerr << (active ? active->help("mdpm") : app.help());
    return 1;
  } catch (const UsageError& e) {
    note(e.what());
    if (active) std::cerr << active->help("mdpm");
    return 1;
  } catch (const mdpm::Error& e) {
    note(e.what());
    return 2;
  } catch (const std::exception& e) {
    note(std::string("unexpected failure: ") + e.what());
    return 2;
  }
}
