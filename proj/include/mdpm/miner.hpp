#pragma once

// Association-rule mining over a TransactionDatabase.
//
// A pattern P (feature items only) is reported when
//     supp(P) > supp_min   and   conf(P -> consequent) > conf_min
// with both comparisons done exactly on integer counts. Candidates are
// generated level by level and pruned by support anti-monotonicity.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdpm/transact.hpp"

namespace mdpm {

/// Non-negative rational threshold in lowest terms, parsed exactly from the
/// decimal a user typed ("0.6" is 3/5), so that decimal is the value compared
/// against.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  /// Parses a plain or scientific decimal literal exactly.
  static Fraction parse(std::string_view text);
  /// Uses the shortest decimal that round-trips to `value`.
  static Fraction from_double(double value);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;

  friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// Exact test of count / total > threshold.
bool exceeds(std::uint64_t count, std::uint64_t total, const Fraction& threshold);

struct MiningConfig {
  Fraction supp_min{1, 10000};
  Fraction conf_min{3, 10};
  std::uint32_t min_len = 2;
  std::uint32_t max_len = 8;
  /// Rule consequent; the database's pos item when unset.
  std::optional<Item> consequent;
  /// Recorded on each mined pattern.
  std::int32_t category = 0;
  unsigned workers = 1;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

struct Pattern {
  ItemSet items;
  double support = 0.0;
  double confidence = 0.0;
  std::int32_t category = 0;
  /// Exact counts: transactions containing P, containing P and the
  /// consequent, and the database size.
  std::uint64_t count = 0;
  std::uint64_t rule_count = 0;
  std::uint64_t total = 0;
};

/// Number of transactions whose items plus class item contain `itemset`.
std::uint64_t count_containing(const TransactionDatabase& db, const ItemSet& itemset);

double support(const TransactionDatabase& db, const ItemSet& itemset);
double confidence(const TransactionDatabase& db, const ItemSet& antecedent,
                  Item consequent);

/// Patterns sorted canonically (length, then lexicographic items).
std::vector<Pattern> mine_rules(const TransactionDatabase& db, const MiningConfig& cfg);

inline constexpr std::size_t kBruteForceMaxItems = 20;

/// Exhaustive enumeration over the items present in the database. Refuses
/// (ValidationError) when more than kBruteForceMaxItems distinct antecedent
/// items occur.
std::vector<Pattern> mine_rules_bruteforce(const TransactionDatabase& db,
                                           const MiningConfig& cfg);

/// JSON-lines pattern file: {"category":..,"items":[..],"support":..,"confidence":..}
void write_patterns(const std::vector<Pattern>& patterns, std::ostream& out);
std::vector<Pattern> read_patterns(std::istream& in);

}  // namespace mdpm
