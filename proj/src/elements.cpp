#include "mdpm/elements.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "mdpm/error.hpp"
#include "mdpm/io.hpp"

namespace mdpm {

InvertedIndex::InvertedIndex(const TransactionDatabase& db) : transactions_(db.size()) {
  if (db.empty()) throw EmptyInputError("cannot index an empty database");
  const std::uint32_t universe = db.item_universe();
  std::vector<std::uint32_t> counts(universe + 1, 0);
  for (const auto& t : db.transactions()) {
    for (Item i : t.items) ++counts[i + 1];
    ++counts[t.class_item + 1];
  }
  offsets_.assign(universe + 1, 0);
  for (std::uint32_t i = 0; i < universe; ++i) offsets_[i + 1] = offsets_[i] + counts[i + 1];
  postings_.resize(offsets_.back());
  std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::uint32_t pos = 0; pos < db.size(); ++pos) {
    const auto& t = db[pos];
    for (Item i : t.items) postings_[cursor[i]++] = pos;
    postings_[cursor[t.class_item]++] = pos;
  }
}

std::span<const std::uint32_t> InvertedIndex::posting(Item item) const {
  if (item + 1 >= offsets_.size()) return {};
  return {postings_.data() + offsets_[item], postings_.data() + offsets_[item + 1]};
}

InvertedIndex build_inverted_index(const TransactionDatabase& db) {
  return InvertedIndex(db);
}

MidLevelElement retrieve_element(const Pattern& pattern, const InvertedIndex& index,
                                 const TransactionDatabase& db,
                                 const FeatureStore& store) {
  if (db.size() != store.size()) {
    throw ValidationError("transaction database does not align with the feature store");
  }
  // Shortest list first keeps the intersection small.
  std::vector<std::span<const std::uint32_t>> lists;
  lists.push_back(index.posting(db.pos_item()));
  for (Item i : pattern.items) lists.push_back(index.posting(i));
  std::sort(lists.begin(), lists.end(),
            [](auto a, auto b) { return a.size() < b.size(); });

  std::vector<std::uint32_t> acc(lists.front().begin(), lists.front().end());
  std::vector<std::uint32_t> tmp;
  for (std::size_t l = 1; l < lists.size() && !acc.empty(); ++l) {
    tmp.clear();
    std::set_intersection(acc.begin(), acc.end(), lists[l].begin(), lists[l].end(),
                          std::back_inserter(tmp));
    acc.swap(tmp);
  }
  if (acc.empty()) {
    throw EmptyInputError("pattern matches no positive transaction");
  }

  MidLevelElement e;
  e.pattern = pattern;
  e.members.assign(acc.begin(), acc.end());
  for (auto pos : e.members) e.member_images.push_back(store[pos].image_id);
  std::sort(e.member_images.begin(), e.member_images.end());
  e.member_images.erase(std::unique(e.member_images.begin(), e.member_images.end()),
                        e.member_images.end());
  return e;
}

std::size_t coverage(const MidLevelElement& element) {
  return element.member_images.size();
}

bool ranks_before(const MidLevelElement& a, const MidLevelElement& b) {
  const auto ca = coverage(a), cb = coverage(b);
  if (ca != cb) return ca > cb;
  if (a.pattern.support != b.pattern.support) return a.pattern.support > b.pattern.support;
  return canonical_less(a.pattern.items, b.pattern.items);
}

std::vector<MidLevelElement> select_top_patterns(std::vector<MidLevelElement> elements,
                                                 std::size_t x) {
  std::stable_sort(elements.begin(), elements.end(), ranks_before);
  if (elements.size() > x) elements.resize(x);
  return elements;
}

void write_elements(std::span<const MidLevelElement> elements, std::ostream& out) {
  for (const auto& e : elements) {
    const auto& p = e.pattern;
    out << "{\"category\":" << p.category << ",\"items\":[";
    for (std::size_t i = 0; i < p.items.size(); ++i) out << (i ? "," : "") << p.items[i];
    out << "],\"support\":" << format_real(p.support)
        << ",\"confidence\":" << format_real(p.confidence) << ",\"count\":" << p.count
        << ",\"rule_count\":" << p.rule_count << ",\"total\":" << p.total
        << ",\"members\":[";
    for (std::size_t i = 0; i < e.members.size(); ++i) out << (i ? "," : "") << e.members[i];
    out << "],\"images\":[";
    for (std::size_t i = 0; i < e.member_images.size(); ++i) {
      out << (i ? "," : "") << e.member_images[i];
    }
    out << "],\"coverage\":" << coverage(e) << "}\n";
  }
}

std::vector<MidLevelElement> read_elements(std::istream& in) {
  std::vector<MidLevelElement> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      MidLevelElement e;
      e.pattern.category = j.at("category").get<std::int32_t>();
      e.pattern.items = ItemSet(j.at("items").get<std::vector<Item>>());
      e.pattern.support = j.at("support").get<double>();
      e.pattern.confidence = j.at("confidence").get<double>();
      e.pattern.count = j.value("count", std::uint64_t{0});
      e.pattern.rule_count = j.value("rule_count", std::uint64_t{0});
      e.pattern.total = j.value("total", std::uint64_t{0});
      e.members = j.at("members").get<std::vector<std::size_t>>();
      e.member_images = j.at("images").get<std::vector<std::uint32_t>>();
      if (e.members.empty()) throw FormatError("element has no members");
      if (!std::is_sorted(e.members.begin(), e.members.end())) {
        throw FormatError("element members are not ascending");
      }
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError("element file line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace mdpm
