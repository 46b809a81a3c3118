#pragma once

// Turning activation vectors into transactions.
//
// Items are 0-based activation dimensions. For a store of dimension D the
// class items are D (target category, "pos") and D + 1 (background, "neg").
// Only strictly positive components can become items, so a transaction may
// hold fewer than K feature items.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mdpm/featstore.hpp"

namespace mdpm {

using Item = std::uint32_t;

/// Strictly ascending, duplicate-free list of item ids.
class ItemSet {
 public:
  ItemSet() = default;
  /// Sorts and deduplicates.
  ItemSet(std::initializer_list<Item> items);
  explicit ItemSet(std::vector<Item> items);

  std::span<const Item> items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  Item operator[](std::size_t i) const { return items_[i]; }
  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

  bool contains(Item item) const;
  /// True when every item of this set is in `other`.
  bool subset_of(std::span<const Item> sorted_other) const;
  bool subset_of(const ItemSet& other) const { return subset_of(other.items()); }

  /// Canonical order: shorter first, then lexicographic.
  friend bool canonical_less(const ItemSet& a, const ItemSet& b);
  friend auto operator<=>(const ItemSet&, const ItemSet&) = default;
  friend bool operator==(const ItemSet&, const ItemSet&) = default;

 private:
  std::vector<Item> items_;
};

bool canonical_less(const ItemSet& a, const ItemSet& b);

struct Transaction {
  ItemSet items;  // feature items only, each < D
  Item class_item = 0;

  /// Membership over items plus the class item.
  bool contains(Item item) const { return item == class_item || items.contains(item); }
};

class TransactionDatabase {
 public:
  TransactionDatabase(std::uint32_t dim, std::uint32_t k);

  void add(Transaction t);

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t k() const noexcept { return k_; }
  Item pos_item() const noexcept { return dim_; }
  Item neg_item() const noexcept { return dim_ + 1; }
  /// Number of distinct item ids, feature and class items included.
  std::uint32_t item_universe() const noexcept { return dim_ + 2; }

  std::size_t size() const noexcept { return transactions_.size(); }
  bool empty() const noexcept { return transactions_.empty(); }
  std::size_t pos_count() const noexcept { return pos_count_; }
  std::size_t neg_count() const noexcept { return neg_count_; }

  const Transaction& operator[](std::size_t i) const { return transactions_[i]; }
  std::span<const Transaction> transactions() const noexcept { return transactions_; }

 private:
  std::uint32_t dim_;
  std::uint32_t k_;
  std::vector<Transaction> transactions_;
  std::size_t pos_count_ = 0;
  std::size_t neg_count_ = 0;
};

/// Indices of the k largest strictly positive components, ascending. Equal
/// magnitudes prefer the lower index.
ItemSet top_k_indices(std::span<const float> activation, std::uint32_t k);

Transaction make_transaction(const PatchRecord& record, std::uint32_t dim,
                             std::uint32_t k, std::int32_t target_category);

/// One transaction per record, in store order. Throws EmptyInputError on an
/// empty store.
TransactionDatabase build_database(const FeatureStore& store, std::uint32_t k,
                                   std::int32_t target_category,
                                   unsigned workers = 1);

std::vector<float> sparsify_topk(std::span<const float> activation, std::uint32_t k);
std::vector<float> binarize_topk(std::span<const float> activation, std::uint32_t k);
std::vector<float> max_pool_vectors(std::span<const std::vector<float>> vectors);

/// One line per transaction: ascending feature items then the class item.
void write_transactions(const TransactionDatabase& db, std::ostream& out);

}  // namespace mdpm
