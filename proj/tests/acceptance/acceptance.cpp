// Acceptance suite: one PASS/FAIL line per primary criterion.
//
// Exit status is 0 only when every checked criterion passes. Criterion 10
// is a statement about what cannot be reproduced here; it is reported as
// such and does not affect the exit status.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mdpm/context.hpp"
#include "mdpm/elements.hpp"
#include "mdpm/encode.hpp"
#include "mdpm/error.hpp"
#include "mdpm/lda.hpp"
#include "mdpm/learn.hpp"
#include "mdpm/miner.hpp"
#include "mdpm/pipeline.hpp"
#include "mdpm/synthgen.hpp"
#include "mdpm/transact.hpp"

namespace {

using namespace mdpm;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool g_all_pass = true;

void report(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = seconds_since(t0);
  g_all_pass = g_all_pass && o.pass;
  std::printf("criterion %2d [%s] %s: %s (%.3f s)\n", id, o.pass ? "PASS" : "FAIL", name,
              o.detail.c_str(), s);
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// 1. Running example.

Outcome running_example() {
  // Items 1..4 as in the worked example; a dimension of 5 keeps them in range.
  TransactionDatabase db(5, 5);
  const std::vector<ItemSet> rows = {{3, 4}, {1, 2, 4}, {1, 4}, {1, 3, 4}, {1, 2, 3, 4}};
  for (const auto& r : rows) db.add({r, db.pos_item()});
  const auto t0 = Clock::now();
  const auto supp_count = count_containing(db, ItemSet{1, 4});
  const auto rule_count = count_containing(db, ItemSet{1, 3, 4});
  const double supp = support(db, ItemSet{1, 4});
  const double conf = confidence(db, ItemSet{1, 4}, 3);
  const double ms = seconds_since(t0) * 1e3;
  // Exact rationals: 4/5 and 2/4.
  const bool exact = supp_count * 5 == 4 * db.size() && rule_count * 2 == supp_count;
  const bool pass = exact && supp == 0.8 && conf == 0.5 && ms < 1.0;
  return {pass, fmt("supp({1,4}) = %llu/%zu = %.17g, conf({1,4}->3) = %llu/%llu = %.17g, %.4f ms",
                    static_cast<unsigned long long>(supp_count), db.size(), supp,
                    static_cast<unsigned long long>(rule_count),
                    static_cast<unsigned long long>(supp_count), conf, ms)};
}

// ---------------------------------------------------------------------------
// 2 & 3. Randomized oracle corpus.

struct Case {
  TransactionDatabase db;
  MiningConfig cfg;
};

std::vector<Case> oracle_corpus(std::size_t count) {
  std::mt19937_64 rng(20240601);
  auto uni = [&](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };
  std::vector<Case> out;
  for (std::size_t c = 0; c < count; ++c) {
    const auto dim = static_cast<std::uint32_t>(uni(1, 12));
    const auto n = uni(1, 500);
    const auto k = static_cast<std::uint32_t>(uni(1, dim));
    const double density = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    const double pos_rate = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    TransactionDatabase db(dim, k);
    for (std::uint64_t t = 0; t < n; ++t) {
      std::vector<Item> items;
      for (Item i = 0; i < dim && items.size() < k; ++i) {
        if (std::bernoulli_distribution(density)(rng)) items.push_back(i);
      }
      const bool pos = std::bernoulli_distribution(pos_rate)(rng);
      db.add({ItemSet(items), pos ? db.pos_item() : db.neg_item()});
    }
    MiningConfig cfg;
    // Thresholds on a grid that includes values hit exactly by count ratios.
    const std::uint64_t sden = uni(1, 4) == 1 ? n : 1000;
    cfg.supp_min = {uni(1, sden), sden};
    const std::uint64_t cden = uni(1, 3) == 1 ? 4 : 100;
    cfg.conf_min = {uni(1, cden), cden};
    cfg.min_len = static_cast<std::uint32_t>(uni(1, 3));
    cfg.max_len = static_cast<std::uint32_t>(uni(cfg.min_len, 6));
    cfg.consequent = db.pos_item();
    out.push_back({std::move(db), cfg});
  }
  return out;
}

bool same_patterns(const std::vector<Pattern>& a, const std::vector<Pattern>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].items != b[i].items || a[i].support != b[i].support ||
        a[i].confidence != b[i].confidence || a[i].count != b[i].count ||
        a[i].rule_count != b[i].rule_count) {
      return false;
    }
  }
  return true;
}

const std::vector<Case>& corpus() {
  static const auto c = oracle_corpus(1000);
  return c;
}

Outcome oracle_equivalence() {
  std::size_t mismatches = 0, patterns = 0, nonempty = 0;
  for (const auto& c : corpus()) {
    const auto fast = mine_rules(c.db, c.cfg);
    const auto slow = mine_rules_bruteforce(c.db, c.cfg);
    mismatches += same_patterns(fast, slow) ? 0 : 1;
    patterns += fast.size();
    nonempty += fast.empty() ? 0 : 1;
  }
  return {mismatches == 0,
          fmt("%zu databases, %zu with patterns, %zu patterns total, %zu mismatches",
              corpus().size(), nonempty, patterns, mismatches)};
}

Outcome product_identity() {
  std::size_t checked = 0, violations = 0;
  for (const auto& c : corpus()) {
    const auto n = static_cast<unsigned __int128>(c.db.size());
    for (const auto& p : mine_rules(c.db, c.cfg)) {
      std::vector<Item> with_pos(p.items.begin(), p.items.end());
      with_pos.push_back(c.db.pos_item());
      const auto joint = count_containing(c.db, ItemSet(with_pos));
      const auto base = count_containing(c.db, p.items);
      // Reported supp(P) = count/n and conf = rule_count/count; their product,
      // reduced, must equal the independently counted supp(P u {pos}) = joint/n.
      std::uint64_t pn = p.count * p.rule_count, pd = c.db.size() * p.count;
      const auto g1 = std::gcd(pn, pd);
      std::uint64_t qn = joint, qd = c.db.size();
      const auto g2 = std::gcd(qn, qd);
      const bool identity =
          base > 0 && p.count == base && pn / g1 == qn / g2 && pd / g1 == qd / g2 &&
          p.support == static_cast<double>(base) / static_cast<double>(c.db.size()) &&
          p.confidence == static_cast<double>(joint) / static_cast<double>(base);
      // joint/n > s*f  <=>  joint * sden * fden > snum * fnum * n
      const auto lhs = static_cast<unsigned __int128>(joint) * c.cfg.supp_min.den * c.cfg.conf_min.den;
      const auto rhs = static_cast<unsigned __int128>(c.cfg.supp_min.num) * c.cfg.conf_min.num * n;
      violations += identity && lhs > rhs ? 0 : 1;
      ++checked;
    }
  }
  return {checked > 0 && violations == 0,
          fmt("%zu mined patterns checked, %zu violations", checked, violations)};
}

// ---------------------------------------------------------------------------
// 4 & 5. Planted recovery and end-to-end classification.

SynthSpec acceptance_spec(std::uint64_t seed) {
  SynthSpec s;  // defaults are the acceptance spec
  s.seed = seed;
  s.layout_seed = 0;
  return s;
}

MiningConfig acceptance_mining() {
  MiningConfig cfg;
  cfg.supp_min = Fraction::parse("0.01");
  cfg.conf_min = Fraction::parse("0.6");
  return cfg;
}

constexpr std::uint32_t kAcceptanceK = 8;

struct Discovery {
  SynthDataset data;
  std::vector<std::vector<MidLevelElement>> elements;  // per category
  std::vector<Pattern> patterns;
};

const Discovery& discovery() {
  static const Discovery d = [] {
    Discovery d;
    d.data = generate_dataset(acceptance_spec(0));
    for (auto c : store_categories(d.data.store)) {
      auto mined = mine_category(d.data.store, kAcceptanceK, c, acceptance_mining());
      d.elements.push_back(retrieve_category(d.data.store, kAcceptanceK, c, mined));
      d.patterns.insert(d.patterns.end(), mined.begin(), mined.end());
    }
    return d;
  }();
  return d;
}

Outcome planted_recovery() {
  const auto t0 = Clock::now();
  const auto& d = discovery();
  const auto& data = d.data;
  const auto rep = planted_recovery_report(d.patterns, data.concepts);

  std::size_t merged_count = 0;
  double worst_jaccard = 1.0;
  bool one_per_concept = true;
  std::vector<int> concept_seen(data.concepts.size(), 0);
  double th_min = 1e300, th_max = -1e300;
  for (std::size_t ci = 0; ci < d.elements.size(); ++ci) {
    const auto& elements = d.elements[ci];
    const auto category = static_cast<std::int32_t>(ci);
    std::vector<std::int32_t> groups;
    for (const auto& e : elements) groups.push_back(matching_concept(e.pattern.items, data.concepts));
    const auto stats = estimate_background(data.store, background_positions(data.store, category));
    const double th = calibrate_merge_threshold(elements, groups, data.store, stats);
    th_min = std::min(th_min, th);
    th_max = std::max(th_max, th);
    const auto merged = ensemble_merge(elements, data.store, stats, th);
    merged_count += merged.elements.size();
    for (const auto& m : merged.elements) {
      // The concept this merged element stands for: the one of its seed.
      const auto concept_id = groups[m.sources.front()];
      if (concept_id < 0) {
        one_per_concept = false;
        worst_jaccard = 0.0;
        continue;
      }
      ++concept_seen[static_cast<std::size_t>(concept_id)];
      std::vector<std::size_t> truth;
      for (std::size_t r = 0; r < data.store.size(); ++r) {
        if (data.record_concept[r] == concept_id && data.store[r].class_label == category) {
          truth.push_back(r);
        }
      }
      worst_jaccard = std::min(worst_jaccard, jaccard(m.members, truth));
    }
  }
  for (int seen : concept_seen) one_per_concept = one_per_concept && seen == 1;
  const double s = seconds_since(t0);
  const bool pass = rep.recall == 1.0 && rep.precision >= 0.95 && merged_count == 6 &&
                    one_per_concept && worst_jaccard >= 0.9 && s < 30.0;
  return {pass, fmt("recall %.3f, precision %.4f (%zu patterns), %zu merged elements "
                    "(one per concept: %s), min Jaccard %.4f, th in [%.3g, %.3g]",
                    rep.recall, rep.precision, d.patterns.size(), merged_count,
                    one_per_concept ? "yes" : "no", worst_jaccard, th_min, th_max)};
}

Outcome classification() {
  const auto t0 = Clock::now();
  const auto& d = discovery();
  const std::size_t x = 10;
  std::vector<Detector> detectors;
  for (std::size_t ci = 0; ci < d.elements.size(); ++ci) {
    const auto category = static_cast<std::int32_t>(ci);
    const auto stats = estimate_background(d.data.store, background_positions(d.data.store, category));
    const auto top = select_top_patterns(d.elements[ci], x);
    if (top.size() != x) return {false, fmt("category %zu has only %zu elements", ci, top.size())};
    for (const auto& e : top) {
      auto det = train_lda(d.data.store, e.members, stats);
      det.category = category;
      detectors.push_back(std::move(det));
    }
  }
  const PyramidLayout layout;
  const auto test = generate_dataset(acceptance_spec(1));
  const FeatureStore* train_scales[] = {&d.data.store};
  const FeatureStore* test_scales[] = {&test.store};
  const auto train_enc = encode_store_boe(train_scales, detectors, layout);
  const auto test_enc = encode_store_boe(test_scales, detectors, layout);

  auto split = [](const std::vector<EncodedImage>& enc) {
    std::pair<std::vector<std::vector<double>>, std::vector<std::int32_t>> out;
    for (const auto& e : enc) {
      out.first.push_back(e.values);
      out.second.push_back(e.label);
    }
    return out;
  };
  const auto [xtr, ytr] = split(train_enc);
  const auto [xte, yte] = split(test_enc);
  SvmOptions opts;
  opts.folds = 5;
  const auto model = train_ovr(xtr, ytr, opts);
  const double acc = accuracy(model, xte, yte);
  const double s = seconds_since(t0);
  const std::size_t length = xtr.front().size();
  const bool pass = acc >= 0.95 && length == x * 3 * 5 && s < 60.0;
  return {pass, fmt("%zu detectors, encoding length %zu, %zu train / %zu test images, "
                    "held-out accuracy %.4f",
                    detectors.size(), length, xtr.size(), xte.size(), acc)};
}

// ---------------------------------------------------------------------------
// 6. Throughput.

Outcome throughput() {
  BenchSpec spec;
  const auto db = generate_bench_database(spec);
  MiningConfig cfg;
  cfg.supp_min = Fraction::parse("0.0001");
  cfg.conf_min = Fraction::parse("0.6");
  cfg.consequent = db.pos_item();
  const auto t0 = Clock::now();
  const auto patterns = mine_rules(db, cfg);
  const double s = seconds_since(t0);
  std::size_t max_len = 0;
  for (const auto& t : db.transactions()) max_len = std::max(max_len, t.items.size() + 1);
  const bool shape = db.size() == 200000 && max_len == 21 && db.item_universe() == 4098;
  return {shape && s <= 60.0,
          fmt("%zu transactions of length %zu over %u items, %zu patterns mined in %.2f s "
              "(single worker)",
              db.size(), max_len, db.item_universe(), patterns.size(), s)};
}

// ---------------------------------------------------------------------------
// 7. Encoding shape and invariants.

Outcome encoding_invariants() {
  std::mt19937_64 rng(7);
  const PyramidLayout layout;
  bool shape_ok = true;
  // Shape: X * Y * 5 for a few (X, Y).
  for (auto [xx, yy] : {std::pair{10, 3}, std::pair{50, 20}, std::pair{1, 1}}) {
    std::vector<Pattern> patterns;
    std::vector<Detector> detectors;
    for (int c = 0; c < yy; ++c) {
      for (int k = 0; k < xx; ++k) {
        Pattern p;
        p.items = ItemSet{static_cast<Item>(k % 8), static_cast<Item>(8 + k % 8)};
        p.category = c;
        patterns.push_back(p);
        Detector d;
        d.weights = Eigen::VectorXd::Ones(16);
        d.category = c;
        detectors.push_back(d);
      }
    }
    std::vector<float> act(16, 1.0f);
    std::vector<PatchView> one = {{act, {0, 0, 32, 32, 1.0f}}};
    const ScaleInput scale{one, 64, 64};
    const auto bop = encode_bop(one, patterns, 64, 64, layout);
    const auto boe = encode_boe(std::span(&scale, 1), detectors, layout);
    const auto want = static_cast<std::size_t>(xx * yy * 5);
    shape_ok = shape_ok && bop.values.size() == want && boe.values.size() == want;
  }

  std::size_t perm_fail = 0, nest_fail = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t dim = 12, w = 200, h = 150;
    const int y = 1 + static_cast<int>(rng() % 3), x = 1 + static_cast<int>(rng() % 4);
    std::vector<Pattern> patterns;
    std::vector<Detector> detectors;
    for (int c = 0; c < y; ++c) {
      for (int k = 0; k < x; ++k) {
        std::vector<Item> items;
        const auto len = 1 + rng() % 3;
        for (std::size_t i = 0; i < len; ++i) items.push_back(static_cast<Item>(rng() % dim));
        Pattern p;
        p.items = ItemSet(items);
        p.category = c;
        patterns.push_back(p);
        Detector d;
        d.weights = Eigen::VectorXd::Random(dim);
        d.category = c;
        detectors.push_back(d);
      }
    }
    const auto npatch = rng() % 30;
    std::vector<std::vector<float>> acts;
    std::vector<PatchGeometry> geoms;
    for (std::size_t i = 0; i < npatch; ++i) {
      std::vector<float> a(dim);
      for (auto& v : a) v = rng() % 3 == 0 ? static_cast<float>(rng() % 100) / 10.0f : 0.0f;
      acts.push_back(a);
      const auto pw = static_cast<std::uint16_t>(1 + rng() % 60);
      const auto ph = static_cast<std::uint16_t>(1 + rng() % 60);
      geoms.push_back({static_cast<std::uint16_t>(rng() % (w - pw + 1)),
                       static_cast<std::uint16_t>(rng() % (h - ph + 1)), pw, ph, 1.0f});
    }
    std::vector<PatchView> views, shuffled;
    for (std::size_t i = 0; i < npatch; ++i) views.push_back({acts[i], geoms[i]});
    shuffled = views;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    // Split into two scales for BoE, then swap scale order and patch order.
    const auto cut = views.size() / 2;
    const std::span<const PatchView> a(views.data(), cut), b(views.data() + cut, views.size() - cut);
    std::vector<PatchView> as(a.begin(), a.end()), bs(b.begin(), b.end());
    std::shuffle(as.begin(), as.end(), rng);
    std::shuffle(bs.begin(), bs.end(), rng);
    const ScaleInput s1[] = {{a, w, h}, {b, w, h}};
    const ScaleInput s2[] = {{bs, w, h}, {as, w, h}};
    if (encode_bop(views, patterns, w, h, layout).values !=
            encode_bop(shuffled, patterns, w, h, layout).values ||
        encode_boe(s1, detectors, layout).values != encode_boe(s2, detectors, layout).values) {
      ++perm_fail;
    }
    const auto counts = bop_counts(views, patterns, w, h, layout);
    const std::size_t cols = patterns.size();
    for (std::size_t k = 0; k < cols; ++k) {
      double sum = 0.0;
      for (std::size_t cell = 1; cell < 5; ++cell) sum += counts.values[cell * cols + k];
      if (sum != counts.values[k]) {
        ++nest_fail;
        break;
      }
    }
  }
  return {shape_ok && perm_fail == 0 && nest_fail == 0,
          fmt("length X*Y*5 %s; permutation failures %zu/200; nesting failures %zu/200",
              shape_ok ? "holds" : "violated", perm_fail, nest_fail)};
}

// ---------------------------------------------------------------------------
// 8. LDA numerics.

Outcome lda_numerics() {
  std::mt19937_64 rng(8);
  double worst_ratio = 0.0;
  std::size_t fails = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto dim = static_cast<std::size_t>(2 + rng() % 255);
    const auto n = dim / 2 + 2 + rng() % (2 * dim);  // often fewer samples than dimensions
    std::vector<std::vector<float>> bg(n, std::vector<float>(dim));
    std::gamma_distribution<double> gamma(0.5, 2.0);
    for (auto& v : bg) {
      for (auto& e : v) e = static_cast<float>(gamma(rng));
    }
    const auto stats = estimate_background(bg, kDefaultShrinkage);
    std::vector<std::vector<float>> pos(3 + rng() % 10, std::vector<float>(dim));
    for (auto& v : pos) {
      for (auto& e : v) e = static_cast<float>(gamma(rng) * 3.0);
    }
    const auto det = train_lda(pos, stats);
    Eigen::VectorXd mp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (const auto& v : pos) {
      for (std::size_t j = 0; j < dim; ++j) mp[static_cast<Eigen::Index>(j)] += v[j];
    }
    mp /= static_cast<double>(pos.size());
    const Eigen::VectorXd rhs = mp - stats.mean();
    const double resid = (stats.covariance() * det.weights - rhs).cwiseAbs().maxCoeff();
    const double bound = 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff());
    worst_ratio = std::max(worst_ratio, resid / bound);
    fails += resid <= bound ? 0 : 1;
  }
  std::size_t diag_fails = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto dim = static_cast<Eigen::Index>(1 + rng() % 256);
    Eigen::VectorXd diag(dim), mean(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      diag[j] = std::ldexp(1.0 + static_cast<double>(rng() % 1000) / 100.0,
                           static_cast<int>(rng() % 21) - 10);
      mean[j] = static_cast<double>(rng() % 100) / 10.0;
    }
    const BackgroundStats stats(mean, diag.asDiagonal().toDenseMatrix(), 0.0, 2);
    std::vector<float> xp(static_cast<std::size_t>(dim));
    for (auto& v : xp) v = static_cast<float>(rng() % 200) / 10.0f;
    const auto det = train_lda(std::span(&xp, 1), stats);
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double want = (static_cast<double>(xp[static_cast<std::size_t>(j)]) - mean[j]) / diag[j];
      if (std::abs(det.weights[j] - want) > 1e-12 * std::max(1.0, std::abs(want))) {
        ++diag_fails;
        break;
      }
    }
  }
  return {fails == 0 && diag_fails == 0,
          fmt("100 random systems: worst residual %.3g of bound, %zu failures; "
              "100 diagonal systems: %zu failures",
              worst_ratio, fails, diag_fails)};
}

// ---------------------------------------------------------------------------
// 9. Context analyzer.

struct ContextCase {
  // Pixel counts of a 20x10 image, filled row-major: GT first, then OT,
  // the rest SC.
  std::uint64_t gt, ot, sc;
  FiringType expected;
};

Outcome context_analyzer() {
  using F = FiringType;
  // Hand-labeled fixture over a 20x10 image (200 pixels per box).
  const std::vector<ContextCase> fixture = {
      {0, 0, 200, F::SceneContext},         {1, 0, 199, F::SceneContext},
      {19, 0, 181, F::SceneContext},        {0, 19, 181, F::SceneContext},
      {10, 9, 181, F::SceneContext},        {20, 0, 180, F::GroundTruthObject},  // O_sc = 0.9
      {0, 20, 180, F::ObjectContext},       {10, 10, 180, F::Unresolved},        // 0.9 and tie
      {11, 9, 180, F::GroundTruthObject},   {9, 11, 180, F::ObjectContext},
      {200, 0, 0, F::GroundTruthObject},    {0, 200, 0, F::ObjectContext},
      {100, 100, 0, F::Unresolved},         {120, 60, 20, F::GroundTruthObject},
      {60, 120, 20, F::ObjectContext},      {40, 60, 100, F::ObjectContext},
      {60, 40, 100, F::GroundTruthObject},  {50, 50, 100, F::Unresolved},
      {1, 2, 197, F::SceneContext},         {2, 1, 197, F::SceneContext},
      {21, 0, 179, F::GroundTruthObject},   {0, 21, 179, F::ObjectContext},
      {30, 1, 169, F::GroundTruthObject},   {1, 30, 169, F::ObjectContext},
  };
  std::size_t checked = 0, wrong = 0, inexact = 0;
  for (const auto& c : fixture) {
    PixelMasks masks(20, 10);
    std::uint64_t i = 0;
    for (std::uint32_t y = 0; y < 10; ++y) {
      for (std::uint32_t x = 0; x < 20; ++x, ++i) {
        masks.set(x, y, i < c.gt ? PixelClass::GroundTruth
                        : i < c.gt + c.ot ? PixelClass::OtherObject
                                          : PixelClass::Scene);
      }
    }
    // Box larger than the image, so clipping is exercised too.
    const PatchGeometry box{0, 0, 40, 30, 1.0f};
    const auto counts = overlap_counts(box, masks);
    const auto ratios = overlap_ratios(box, masks);
    // Exactness lives in the integer counts: gt/n + ot/n + sc/n = n/n with n
    // the clipped box area. The reals must be exactly those quotients.
    const double n = static_cast<double>(counts.total());
    if (counts.gt != c.gt || counts.ot != c.ot || counts.sc != c.sc || counts.total() != 200 ||
        ratios.gt != static_cast<double>(c.gt) / n || ratios.ot != static_cast<double>(c.ot) / n ||
        ratios.sc != static_cast<double>(c.sc) / n) {
      ++inexact;
    }
    wrong += classify_firing(counts) == c.expected ? 0 : 1;
    ++checked;
  }
  // Ratio-level cases from the rule text, including the exact 0.9 boundary.
  const std::vector<std::pair<OverlapRatios, F>> ratio_cases = {
      {{0.05, 0.0, 0.95}, F::SceneContext},   {{0.2, 0.3, 0.5}, F::ObjectContext},
      {{0.6, 0.1, 0.3}, F::GroundTruthObject}, {{0.25, 0.25, 0.5}, F::Unresolved},
      {{0.1, 0.0, 0.9}, F::GroundTruthObject}, {{0.05, 0.05, 0.9}, F::Unresolved},
  };
  for (const auto& [r, want] : ratio_cases) {
    wrong += classify_firing(r) == want ? 0 : 1;
    ++checked;
  }
  return {checked >= 30 && wrong == 0 && inexact == 0,
          fmt("%zu hand-labeled cases, %zu misclassified, %zu with inexact ratios", checked,
              wrong, inexact)};
}

}  // namespace

int main() {
  std::printf("mdpm acceptance suite\n");
  report(1, "running example", running_example);
  report(2, "oracle equivalence", oracle_equivalence);
  report(3, "support-confidence product identity", product_identity);
  report(4, "planted recovery and merging", planted_recovery);
  report(5, "end-to-end classification", classification);
  report(6, "mining throughput", throughput);
  report(7, "encoding shape and invariants", encoding_invariants);
  report(8, "LDA numerics", lda_numerics);
  report(9, "context analyzer", context_analyzer);
  std::printf("criterion 10 [NOT REPRODUCIBLE] headline dataset accuracies: require pretrained "
              "networks and the full image datasets; criteria 1-9 stand in with property-based "
              "checks and use only the primary components\n");
  std::printf("%s\n", g_all_pass ? "ALL PRIMARY CRITERIA PASS" : "SOME CRITERIA FAILED");
  return g_all_pass ? 0 : 1;
}
