#include <algorithm>
#include <cmath>

#include "qtikhonov/param_search.hpp"
#include "qtikhonov/statevector.hpp"

namespace qtik {

namespace {

bool before(const SearchItem& a, const SearchItem& b) {
  return a.value < b.value || (a.value == b.value && a.index < b.index);
}

std::size_t draw_item(std::span<const SearchItem> items, const std::vector<std::size_t>& pool,
                      std::mt19937_64& rng) {
  std::vector<double> w(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) w[i] = items[pool[i]].probability;
  return pool[sample_index(w, rng)];
}

}  // namespace

std::uint64_t durr_hoyer_budget(std::size_t p) {
  const double lp = std::log2(static_cast<double>(p));
  return static_cast<std::uint64_t>(std::floor(22.5 * std::sqrt(static_cast<double>(p)) + 1.4 * lp * lp));
}

MinimumSearch durr_hoyer_search(std::span<const SearchItem> items, std::size_t p,
                                std::mt19937_64& rng) {
  if (items.empty() || p == 0) throw std::invalid_argument("minimum finding over an empty set");
  std::vector<std::size_t> all(items.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  MinimumSearch out;
  out.item = draw_item(items, all, rng);
  out.threshold_history.push_back(items[out.item].index);
  if (p == 1) return out;

  const std::uint64_t budget = durr_hoyer_budget(p);
  const double lambda = 6.0 / 5.0;
  const double m_cap = std::sqrt(static_cast<double>(p));
  double m = 1.0;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::size_t> marked;
  double mass = 0.0;
  auto refresh = [&] {
    marked.clear();
    mass = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (before(items[i], items[out.item])) {
        marked.push_back(i);
        mass += items[i].probability;
      }
    }
  };
  refresh();

  while (true) {
    const auto top = static_cast<std::uint64_t>(std::ceil(m));
    std::uniform_int_distribution<std::uint64_t> pick(0, top - 1);
    const std::uint64_t j = pick(rng);
    if (out.queries + j + 1 > budget) break;
    out.queries += j + 1;

    const double a = std::clamp(mass, 0.0, 1.0);
    const double s = std::sin(static_cast<double>(2 * j + 1) * std::asin(std::sqrt(a)));
    if (!marked.empty() && coin(rng) < s * s) {
      out.item = draw_item(items, marked, rng);
      out.threshold_history.push_back(items[out.item].index);
      refresh();
      m = 1.0;
    } else {
      m = std::min(lambda * m, m_cap);
    }
  }
  return out;
}

SelectionResult durr_hoyer_min(std::span<const double> values, std::mt19937_64& rng) {
  const std::size_t p = values.size();
  std::vector<SearchItem> items(p);
  for (std::size_t i = 0; i < p; ++i) items[i] = {i, values[i], 1.0 / static_cast<double>(p)};
  const MinimumSearch s = durr_hoyer_search(items, p, rng);

  SelectionResult r;
  r.chosen_index = items[s.item].index;
  r.chosen_value = items[s.item].value;
  r.criterion_values.assign(values.begin(), values.end());
  r.queries_used = s.queries;
  r.threshold_history = s.threshold_history;
  return r;
}

}  // namespace qtik
