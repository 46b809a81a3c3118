#include "mdpm/miner.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mdpm/error.hpp"
#include "mdpm/io.hpp"
#include "parallel.hpp"

namespace mdpm {

// ---------------------------------------------------------------------------
// Fraction

namespace {

bool mul_overflows(std::uint64_t a, std::uint64_t b, std::uint64_t& out) {
  return __builtin_mul_overflow(a, b, &out);
}

}  // namespace

Fraction Fraction::parse(std::string_view text) {
  auto fail = [&] { return ValidationError("not a decimal number: '" + std::string(text) + "'"); };
  std::size_t i = 0;
  if (i < text.size() && text[i] == '+') ++i;
  std::uint64_t digits = 0;
  int exp10 = 0;
  bool any = false;
  bool dot = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.') {
      if (dot) throw fail();
      dot = true;
      continue;
    }
    if (c < '0' || c > '9') break;
    any = true;
    if (digits == 0 && c == '0') {
      if (dot) --exp10;
      continue;
    }
    std::uint64_t next;
    if (mul_overflows(digits, 10, next) || next + (c - '0') < next) {
      // Precision beyond 19 digits is dropped.
      if (!dot) ++exp10;
      continue;
    }
    digits = next + static_cast<std::uint64_t>(c - '0');
    if (dot) --exp10;
  }
  if (!any) throw fail();
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    int e = 0;
    const char* first = text.data() + i + 1;
    const char* last = text.data() + text.size();
    if (first < last && *first == '+') ++first;
    auto [p, ec] = std::from_chars(first, last, e);
    if (ec != std::errc() || p != last) throw fail();
    exp10 += e;
    i = text.size();
  }
  if (i != text.size()) throw fail();
  if (digits == 0) return {0, 1};
  while (digits % 10 == 0) {
    digits /= 10;
    ++exp10;
  }
  Fraction f{digits, 1};
  if (exp10 >= 0) {
    for (int k = 0; k < exp10; ++k) {
      if (mul_overflows(f.num, 10, f.num)) throw ValidationError("number too large: " + std::string(text));
    }
    return f;
  }
  for (int k = 0; k < -exp10; ++k) {
    if (mul_overflows(f.den, 10, f.den)) {
      throw ValidationError("number has too many decimal places: " + std::string(text));
    }
  }
  const auto g = std::gcd(f.num, f.den);
  f.num /= g;
  f.den /= g;
  return f;
}

Fraction Fraction::from_double(double value) {
  if (!(value >= 0.0)) throw ValidationError("threshold must be non-negative");
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw ValidationError("cannot format threshold");
  return parse(std::string_view(buf, static_cast<std::size_t>(p - buf)));
}

std::string Fraction::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

bool exceeds(std::uint64_t count, std::uint64_t total, const Fraction& threshold) {
  if (total == 0) return false;
  using u128 = unsigned __int128;
  return static_cast<u128>(count) * threshold.den >
         static_cast<u128>(threshold.num) * total;
}

void MiningConfig::validate() const {
  auto in_unit = [](const Fraction& f) { return f.num > 0 && f.num <= f.den; };
  if (!in_unit(supp_min)) throw ValidationError("supp-min must be in (0,1]");
  if (!in_unit(conf_min)) throw ValidationError("conf-min must be in (0,1]");
  if (min_len < 1) throw ValidationError("min-len must be >= 1");
  if (max_len < min_len) throw ValidationError("max-len must be >= min-len");
}

// ---------------------------------------------------------------------------
// Counting

std::uint64_t count_containing(const TransactionDatabase& db, const ItemSet& itemset) {
  std::uint64_t n = 0;
  for (const auto& t : db.transactions()) {
    bool all = true;
    for (Item i : itemset) {
      if (!t.contains(i)) {
        all = false;
        break;
      }
    }
    n += all ? 1 : 0;
  }
  return n;
}

double support(const TransactionDatabase& db, const ItemSet& itemset) {
  if (db.empty()) throw EmptyInputError("support is undefined on an empty database");
  return static_cast<double>(count_containing(db, itemset)) /
         static_cast<double>(db.size());
}

double confidence(const TransactionDatabase& db, const ItemSet& antecedent,
                  Item consequent) {
  if (db.empty()) throw EmptyInputError("confidence is undefined on an empty database");
  const auto base = count_containing(db, antecedent);
  if (base == 0) {
    throw UndefinedError("confidence undefined: antecedent has zero support");
  }
  std::vector<Item> joined(antecedent.begin(), antecedent.end());
  joined.push_back(consequent);
  const auto both = count_containing(db, ItemSet(std::move(joined)));
  return static_cast<double>(both) / static_cast<double>(base);
}

// ---------------------------------------------------------------------------
// Apriori

namespace {

using Rank = std::uint32_t;
using TidList = std::vector<std::uint32_t>;

struct Level {
  // Itemsets of equal length over dense ranks, lexicographically sorted.
  std::vector<std::vector<Rank>> sets;
  std::vector<TidList> tids;
};

struct RankVecHash {
  std::size_t operator()(const std::vector<Rank>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (Rank r : v) {
      h ^= r;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

Pattern make_pattern(std::vector<Item> items, std::uint64_t count,
                     std::uint64_t rule_count, std::uint64_t total,
                     std::int32_t category) {
  Pattern p;
  p.items = ItemSet(std::move(items));
  p.count = count;
  p.rule_count = rule_count;
  p.total = total;
  p.support = static_cast<double>(count) / static_cast<double>(total);
  p.confidence = static_cast<double>(rule_count) / static_cast<double>(count);
  p.category = category;
  return p;
}

void sort_canonical(std::vector<Pattern>& patterns) {
  std::sort(patterns.begin(), patterns.end(), [](const Pattern& a, const Pattern& b) {
    return canonical_less(a.items, b.items);
  });
}

class AprioriMiner {
 public:
  AprioriMiner(const TransactionDatabase& db, const MiningConfig& cfg)
      : db_(db),
        cfg_(cfg),
        consequent_(cfg.consequent.value_or(db.pos_item())),
        n_(db.size()) {}

  std::vector<Pattern> run() {
    count_singletons();
    if (cfg_.max_len >= 2 && frequent_items_.size() >= 2) {
      Level level = mine_pairs();
      for (std::uint32_t len = 3; len <= cfg_.max_len && level.sets.size() >= 2; ++len) {
        level = extend(level);
      }
    }
    sort_canonical(out_);
    return std::move(out_);
  }

 private:
  void count_singletons() {
    const std::uint32_t dim = db_.dim();
    std::vector<std::uint64_t> count(dim, 0), rule(dim, 0);
    hit_.assign(n_, 0);
    for (std::size_t t = 0; t < n_; ++t) {
      const auto& tr = db_[t];
      const bool h = tr.contains(consequent_);
      hit_[t] = h ? 1 : 0;
      for (Item i : tr.items) {
        ++count[i];
        rule[i] += h ? 1 : 0;
      }
    }
    rank_of_.assign(dim, kNoRank);
    for (Item i = 0; i < dim; ++i) {
      if (i == consequent_ || !exceeds(count[i], n_, cfg_.supp_min)) continue;
      rank_of_[i] = static_cast<Rank>(frequent_items_.size());
      frequent_items_.push_back(i);
      if (cfg_.min_len <= 1) emit({i}, count[i], rule[i]);
    }

    // Transactions projected onto frequent items, in CSR layout.
    offsets_.reserve(n_ + 1);
    offsets_.push_back(0);
    for (std::size_t t = 0; t < n_; ++t) {
      for (Item i : db_[t].items) {
        if (rank_of_[i] != kNoRank) ranks_.push_back(rank_of_[i]);
      }
      offsets_.push_back(ranks_.size());
    }
  }

  void emit(std::vector<Item> items, std::uint64_t count, std::uint64_t rule) {
    if (exceeds(rule, count, cfg_.conf_min)) {
      out_.push_back(make_pattern(std::move(items), count, rule, n_, cfg_.category));
    }
  }

  std::span<const Rank> projected(std::size_t t) const {
    return {ranks_.data() + offsets_[t], ranks_.data() + offsets_[t + 1]};
  }

  // Pair counting: a dense triangular table when it fits, a hash map otherwise.
  Level mine_pairs() {
    const std::uint64_t f = frequent_items_.size();
    const std::uint64_t pairs = f * (f - 1) / 2;
    auto tri = [f](std::uint64_t a, std::uint64_t b) {
      return a * (2 * f - a - 1) / 2 + (b - a - 1);
    };

    std::vector<std::pair<Rank, Rank>> frequent;
    std::vector<std::uint64_t> fcount, frule;
    std::unordered_map<std::uint64_t, std::uint32_t> slot_of;  // sparse path only
    std::vector<std::int32_t> dense_slot;

    if (pairs <= kDensePairLimit) {
      std::vector<std::uint32_t> count(pairs, 0), rule(pairs, 0);
      for (std::size_t t = 0; t < n_; ++t) {
        auto r = projected(t);
        const std::uint32_t h = hit_[t];
        for (std::size_t a = 0; a < r.size(); ++a) {
          for (std::size_t b = a + 1; b < r.size(); ++b) {
            const auto s = tri(r[a], r[b]);
            ++count[s];
            rule[s] += h;
          }
        }
      }
      dense_slot.assign(pairs, -1);
      for (Rank a = 0; a + 1 < f; ++a) {
        for (Rank b = a + 1; b < f; ++b) {
          const auto s = tri(a, b);
          if (!exceeds(count[s], n_, cfg_.supp_min)) continue;
          dense_slot[s] = static_cast<std::int32_t>(frequent.size());
          frequent.emplace_back(a, b);
          fcount.push_back(count[s]);
          frule.push_back(rule[s]);
        }
      }
    } else {
      std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> counts;
      for (std::size_t t = 0; t < n_; ++t) {
        auto r = projected(t);
        for (std::size_t a = 0; a < r.size(); ++a) {
          for (std::size_t b = a + 1; b < r.size(); ++b) {
            auto& c = counts[(static_cast<std::uint64_t>(r[a]) << 32) | r[b]];
            ++c.first;
            c.second += hit_[t];
          }
        }
      }
      std::vector<std::uint64_t> keys;
      for (const auto& [key, c] : counts) {
        if (exceeds(c.first, n_, cfg_.supp_min)) keys.push_back(key);
      }
      std::sort(keys.begin(), keys.end());
      for (auto key : keys) {
        slot_of.emplace(key, static_cast<std::uint32_t>(frequent.size()));
        frequent.emplace_back(static_cast<Rank>(key >> 32), static_cast<Rank>(key));
        fcount.push_back(counts[key].first);
        frule.push_back(counts[key].second);
      }
    }

    if (cfg_.min_len <= 2) {
      for (std::size_t s = 0; s < frequent.size(); ++s) {
        emit({frequent_items_[frequent[s].first], frequent_items_[frequent[s].second]},
             fcount[s], frule[s]);
      }
    }

    Level level;
    if (cfg_.max_len < 3 || frequent.size() < 2) return level;

    // Second pass: tid lists for the frequent pairs.
    level.sets.reserve(frequent.size());
    level.tids.resize(frequent.size());
    for (std::size_t s = 0; s < frequent.size(); ++s) {
      level.sets.push_back({frequent[s].first, frequent[s].second});
      level.tids[s].reserve(fcount[s]);
    }
    for (std::size_t t = 0; t < n_; ++t) {
      auto r = projected(t);
      for (std::size_t a = 0; a < r.size(); ++a) {
        for (std::size_t b = a + 1; b < r.size(); ++b) {
          std::int64_t s = -1;
          if (!dense_slot.empty()) {
            s = dense_slot[tri(r[a], r[b])];
          } else {
            auto it = slot_of.find((static_cast<std::uint64_t>(r[a]) << 32) | r[b]);
            if (it != slot_of.end()) s = it->second;
          }
          if (s >= 0) level.tids[static_cast<std::size_t>(s)].push_back(static_cast<std::uint32_t>(t));
        }
      }
    }
    return level;
  }

  // Joins itemsets sharing all but their last item; a candidate survives
  // only if every one of its subsets one item shorter is frequent.
  Level extend(const Level& prev) {
    std::unordered_set<std::vector<Rank>, RankVecHash> known(prev.sets.begin(),
                                                             prev.sets.end());
    const std::size_t m = prev.sets.size();
    const std::size_t len = prev.sets.front().size() + 1;

    // Prefix groups are contiguous because prev.sets is sorted.
    std::vector<std::size_t> group_end(m);
    for (std::size_t i = m; i-- > 0;) {
      const bool same = i + 1 < m && std::equal(prev.sets[i].begin(), prev.sets[i].end() - 1,
                                                prev.sets[i + 1].begin());
      group_end[i] = same ? group_end[i + 1] : i + 1;
    }

    struct Found {
      std::vector<Rank> set;
      TidList tids;
      std::uint64_t rule = 0;
    };
    // One bucket per left-hand itemset keeps the output order fixed.
    std::vector<std::vector<Found>> partial(m);

    detail::parallel_chunks(m, cfg_.workers, [&](std::size_t begin, std::size_t end) {
      std::vector<Rank> cand(len), sub(len - 1);
      for (std::size_t i = begin; i < end; ++i) {
        auto& found = partial[i];
        for (std::size_t j = i + 1; j < group_end[i]; ++j) {
          std::copy(prev.sets[i].begin(), prev.sets[i].end(), cand.begin());
          cand[len - 1] = prev.sets[j].back();
          bool ok = true;
          // Dropping either of the last two items gives i or j themselves.
          for (std::size_t drop = 0; drop + 2 < len && ok; ++drop) {
            std::size_t o = 0;
            for (std::size_t q = 0; q < len; ++q) {
              if (q != drop) sub[o++] = cand[q];
            }
            ok = known.contains(sub);
          }
          if (!ok) continue;
          TidList tids;
          std::set_intersection(prev.tids[i].begin(), prev.tids[i].end(),
                                prev.tids[j].begin(), prev.tids[j].end(),
                                std::back_inserter(tids));
          if (!exceeds(tids.size(), n_, cfg_.supp_min)) continue;
          std::uint64_t rule = 0;
          for (auto t : tids) rule += hit_[t];
          found.push_back({cand, std::move(tids), rule});
        }
      }
    });

    Level next;
    for (auto& bucket : partial) {
      for (auto& f : bucket) {
        if (len >= cfg_.min_len) {
          std::vector<Item> items(len);
          for (std::size_t q = 0; q < len; ++q) items[q] = frequent_items_[f.set[q]];
          emit(std::move(items), f.tids.size(), f.rule);
        }
        if (len < cfg_.max_len) {
          next.sets.push_back(std::move(f.set));
          next.tids.push_back(std::move(f.tids));
        }
      }
    }
    return next;
  }

  static constexpr Rank kNoRank = ~Rank{0};
  static constexpr std::uint64_t kDensePairLimit = 24'000'000;

  const TransactionDatabase& db_;
  const MiningConfig& cfg_;
  const Item consequent_;
  const std::size_t n_;

  std::vector<std::uint8_t> hit_;
  std::vector<Rank> rank_of_;
  std::vector<Item> frequent_items_;
  std::vector<std::size_t> offsets_;
  std::vector<Rank> ranks_;
  std::vector<Pattern> out_;
};

}  // namespace

std::vector<Pattern> mine_rules(const TransactionDatabase& db, const MiningConfig& cfg) {
  cfg.validate();
  if (db.empty()) throw EmptyInputError("cannot mine an empty database");
  return AprioriMiner(db, cfg).run();
}

std::vector<Pattern> mine_rules_bruteforce(const TransactionDatabase& db,
                                           const MiningConfig& cfg) {
  cfg.validate();
  if (db.empty()) throw EmptyInputError("cannot mine an empty database");
  const Item consequent = cfg.consequent.value_or(db.pos_item());

  std::vector<Item> universe;
  for (const auto& t : db.transactions()) {
    for (Item i : t.items) {
      if (i != consequent) universe.push_back(i);
    }
  }
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
  if (universe.size() > kBruteForceMaxItems) {
    throw ValidationError("brute-force miner refuses " + std::to_string(universe.size()) +
                          " distinct items (limit " +
                          std::to_string(kBruteForceMaxItems) + ")");
  }

  std::vector<std::uint32_t> masks;
  std::vector<bool> hit;
  for (const auto& t : db.transactions()) {
    std::uint32_t mask = 0;
    for (std::size_t b = 0; b < universe.size(); ++b) {
      if (t.items.contains(universe[b])) mask |= 1u << b;
    }
    masks.push_back(mask);
    hit.push_back(t.contains(consequent));
  }

  std::vector<Pattern> out;
  const std::uint32_t limit = 1u << universe.size();
  for (std::uint32_t subset = 1; subset < limit; ++subset) {
    const auto len = static_cast<std::uint32_t>(std::popcount(subset));
    if (len < cfg.min_len || len > cfg.max_len) continue;
    std::uint64_t count = 0, rule = 0;
    for (std::size_t t = 0; t < masks.size(); ++t) {
      if ((masks[t] & subset) == subset) {
        ++count;
        rule += hit[t] ? 1 : 0;
      }
    }
    if (!exceeds(count, db.size(), cfg.supp_min)) continue;
    if (!exceeds(rule, count, cfg.conf_min)) continue;
    std::vector<Item> items;
    for (std::size_t b = 0; b < universe.size(); ++b) {
      if (subset & (1u << b)) items.push_back(universe[b]);
    }
    out.push_back(make_pattern(std::move(items), count, rule, db.size(), cfg.category));
  }
  sort_canonical(out);
  return out;
}

// ---------------------------------------------------------------------------
// Pattern files

void write_patterns(const std::vector<Pattern>& patterns, std::ostream& out) {
  for (const auto& p : patterns) {
    out << "{\"category\":" << p.category << ",\"items\":[";
    for (std::size_t i = 0; i < p.items.size(); ++i) {
      out << (i ? "," : "") << p.items[i];
    }
    out << "],\"support\":" << format_real(p.support)
        << ",\"confidence\":" << format_real(p.confidence) << ",\"count\":" << p.count
        << ",\"rule_count\":" << p.rule_count << ",\"total\":" << p.total << "}\n";
  }
}

std::vector<Pattern> read_patterns(std::istream& in) {
  std::vector<Pattern> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Pattern p;
      p.category = j.at("category").get<std::int32_t>();
      p.items = ItemSet(j.at("items").get<std::vector<Item>>());
      p.support = j.at("support").get<double>();
      p.confidence = j.at("confidence").get<double>();
      p.count = j.value("count", std::uint64_t{0});
      p.rule_count = j.value("rule_count", std::uint64_t{0});
      p.total = j.value("total", std::uint64_t{0});
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("pattern file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mdpm
