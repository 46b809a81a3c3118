#include "mdpm/transact.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>

#include "mdpm/error.hpp"
#include "parallel.hpp"

namespace mdpm {

ItemSet::ItemSet(std::initializer_list<Item> items)
    : ItemSet(std::vector<Item>(items)) {}

ItemSet::ItemSet(std::vector<Item> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

bool ItemSet::contains(Item item) const {
  return std::binary_search(items_.begin(), items_.end(), item);
}

bool ItemSet::subset_of(std::span<const Item> sorted_other) const {
  return std::includes(sorted_other.begin(), sorted_other.end(), items_.begin(),
                       items_.end());
}

bool canonical_less(const ItemSet& a, const ItemSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.items_ < b.items_;
}

TransactionDatabase::TransactionDatabase(std::uint32_t dim, std::uint32_t k)
    : dim_(dim), k_(k) {
  if (dim == 0) throw ValidationError("transaction dimension must be >= 1");
  if (k == 0) throw ValidationError("transaction length K must be >= 1");
}

void TransactionDatabase::add(Transaction t) {
  if (t.items.size() > k_) {
    throw ValidationError("transaction holds more than K feature items");
  }
  if (!t.items.empty() && t.items.items().back() >= dim_) {
    throw ValidationError("feature item out of range");
  }
  if (t.class_item == pos_item()) {
    ++pos_count_;
  } else if (t.class_item == neg_item()) {
    ++neg_count_;
  } else {
    throw ValidationError("class item must be D or D+1");
  }
  transactions_.push_back(std::move(t));
}

namespace {

// Positions of the top-k strictly positive entries, ascending.
std::vector<Item> top_positions(std::span<const float> v, std::uint32_t k) {
  if (k == 0) throw ValidationError("k must be >= 1");
  std::vector<Item> idx;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (v[j] > 0.0f) idx.push_back(static_cast<Item>(j));
  }
  auto larger = [&](Item a, Item b) {
    return v[a] > v[b] || (v[a] == v[b] && a < b);
  };
  if (idx.size() > k) {
    std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), larger);
    idx.resize(k);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

ItemSet top_k_indices(std::span<const float> activation, std::uint32_t k) {
  return ItemSet(top_positions(activation, k));
}

Transaction make_transaction(const PatchRecord& record, std::uint32_t dim,
                             std::uint32_t k, std::int32_t target_category) {
  if (record.activation.size() != dim) {
    throw ValidationError("activation length does not match dimension");
  }
  Transaction t;
  t.items = top_k_indices(record.activation, k);
  t.class_item = record.class_label == target_category ? dim : dim + 1;
  return t;
}

TransactionDatabase build_database(const FeatureStore& store, std::uint32_t k,
                                   std::int32_t target_category,
                                   unsigned workers) {
  if (store.empty()) {
    throw EmptyInputError("cannot build a transaction database from an empty store");
  }
  std::vector<Transaction> out(store.size());
  detail::parallel_chunks(store.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      out[i] = make_transaction(store[i], store.dim(), k, target_category);
    }
  });
  TransactionDatabase db(store.dim(), k);
  for (auto& t : out) db.add(std::move(t));
  return db;
}

std::vector<float> sparsify_topk(std::span<const float> activation, std::uint32_t k) {
  std::vector<float> out(activation.size(), 0.0f);
  for (Item j : top_positions(activation, k)) out[j] = activation[j];
  return out;
}

std::vector<float> binarize_topk(std::span<const float> activation, std::uint32_t k) {
  std::vector<float> out(activation.size(), 0.0f);
  for (Item j : top_positions(activation, k)) out[j] = 1.0f;
  return out;
}

std::vector<float> max_pool_vectors(std::span<const std::vector<float>> vectors) {
  if (vectors.empty()) throw EmptyInputError("max pooling needs at least one vector");
  std::vector<float> out = vectors.front();
  for (const auto& v : vectors.subspan(1)) {
    if (v.size() != out.size()) throw ValidationError("vectors differ in length");
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::max(out[j], v[j]);
  }
  return out;
}

void write_transactions(const TransactionDatabase& db, std::ostream& out) {
  for (const auto& t : db.transactions()) {
    for (Item i : t.items) out << i << ' ';
    out << t.class_item << '\n';
  }
}

}  // namespace mdpm
