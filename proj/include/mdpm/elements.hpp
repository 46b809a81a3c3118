#pragma once

// Mid-level visual elements: the patches that share a mined pattern.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mdpm/featstore.hpp"
#include "mdpm/miner.hpp"
#include "mdpm/transact.hpp"

namespace mdpm {

struct MidLevelElement {
  Pattern pattern;
  /// Ascending record positions into the FeatureStore the database was
  /// built from.
  std::vector<std::size_t> members;
  /// Distinct image ids of the members, ascending.
  std::vector<std::uint32_t> member_images;
};

/// Per-item posting lists of ascending transaction positions. Class items
/// are indexed too.
class InvertedIndex {
 public:
  explicit InvertedIndex(const TransactionDatabase& db);

  std::span<const std::uint32_t> posting(Item item) const;
  std::size_t transaction_count() const noexcept { return transactions_; }

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> postings_;
  std::size_t transactions_ = 0;
};

InvertedIndex build_inverted_index(const TransactionDatabase& db);

/// Intersects the pattern's posting lists with the positive-class posting.
/// Throws EmptyInputError when no positive transaction contains the pattern.
MidLevelElement retrieve_element(const Pattern& pattern, const InvertedIndex& index,
                                 const TransactionDatabase& db,
                                 const FeatureStore& store);

/// Number of distinct source images.
std::size_t coverage(const MidLevelElement& element);

/// Ranking used for selection and for seeding merges: higher coverage,
/// then higher support, then canonical itemset order.
bool ranks_before(const MidLevelElement& a, const MidLevelElement& b);

/// The x best elements by ranks_before, in that order.
std::vector<MidLevelElement> select_top_patterns(std::vector<MidLevelElement> elements,
                                                 std::size_t x);

/// JSON-lines element dump: pattern fields plus members, images, coverage.
void write_elements(std::span<const MidLevelElement> elements, std::ostream& out);
std::vector<MidLevelElement> read_elements(std::istream& in);

}  // namespace mdpm
