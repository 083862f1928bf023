#ifndef SENNS_PAIRS_HPP
#define SENNS_PAIRS_HPP

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "senns/data.hpp"
#include "senns/error.hpp"
#include "senns/matrix.hpp"

namespace senns {

// 1 when both labels name the same class.
constexpr int same_class(ClassId a, ClassId b) { return a == b ? 1 : 0; }
// 1 when the labels differ; always 1 - same_class.
constexpr int diff_class(ClassId a, ClassId b) { return a != b ? 1 : 0; }

struct PairCounts {
  std::size_t same = 0;  // M_C
  std::size_t diff = 0;  // M_D
};

// Counts over every ordered pair (t, u), self-pairs included unless excluded.
inline PairCounts count_pairs(const LabeledDataset& ds, bool exclude_self_pairs = false) {
  std::vector<std::size_t> per_class(ds.num_classes(), 0);
  for (ClassId c : ds.labels) ++per_class[c];
  PairCounts counts;
  const std::size_t m = ds.size();
  for (std::size_t n : per_class) counts.same += n * n;
  counts.diff = m * m - counts.same;
  if (exclude_self_pairs) counts.same -= m;
  return counts;
}

struct Pair {
  std::size_t t;
  std::size_t u;
  bool same_class;

  bool operator==(const Pair&) const = default;
};

enum class PairMode { Full, HeuristicDC };

 // Ordered pair list together with the normalising counts used for the
 // pair weights. In Full mode the counts are over all m^2 ordered pairs; in
 // HeuristicDC mode they are the number of selected same/different pairs.
struct PairList {
  std::vector<Pair> pairs;
  std::size_t m_c = 0;
  std::size_t m_d = 0;
  PairMode mode = PairMode::Full;

  std::size_t size() const { return pairs.size(); }
};

inline PairList build_full(const LabeledDataset& ds, bool exclude_self_pairs = false) {
  if (ds.size() == 0) throw DataError(DataError::Kind::Empty, "cannot build pairs over an empty dataset");
  const std::size_t m = ds.size();
  PairList list;
  list.mode = PairMode::Full;
  list.pairs.reserve(m * m);
  for (std::size_t t = 0; t < m; ++t)
    for (std::size_t u = 0; u < m; ++u) {
      if (exclude_self_pairs && t == u) continue;
      list.pairs.push_back({t, u, same_class(ds.labels[t], ds.labels[u]) == 1});
    }
  const PairCounts c = count_pairs(ds, exclude_self_pairs);
  list.m_c = c.same;
  list.m_d = c.diff;
  return list;
}

// Euclidean distance in input space; the only metric supported.
struct EuclideanMetric {
  double operator()(std::span<const double> a, std::span<const double> b) const {
    return std::sqrt(squared_distance(a, b));
  }
};

namespace detail {

inline std::vector<std::vector<std::size_t>> members_by_class(const LabeledDataset& ds) {
  std::vector<std::vector<std::size_t>> members(ds.num_classes());
  for (std::size_t t = 0; t < ds.size(); ++t) members[ds.labels[t]].push_back(t);
  return members;
}

template <class Metric>
std::vector<Pair> nearest_other_class(const LabeledDataset& ds, std::size_t t,
                                      const std::vector<std::vector<std::size_t>>& members, const Metric& metric) {
  std::vector<Pair> out;
  for (ClassId c = 0; c < members.size(); ++c) {
    if (c == ds.labels[t]) continue;
    std::size_t best = members[c].front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t q : members[c]) {
      const double d = metric(ds.inputs[t], ds.inputs[q]);
      if (d < best_d) {  // strict: ties keep the lowest index
        best_d = d;
        best = q;
      }
    }
    out.push_back({t, best, false});
  }
  return out;
}

template <class Metric>
std::vector<Pair> farthest_same_class(const LabeledDataset& ds, std::size_t t, std::size_t k,
                                      const std::vector<std::vector<std::size_t>>& members, const Metric& metric) {
  struct Cand {
    double dist;
    std::size_t idx;
  };
  std::vector<Cand> cands;
  for (std::size_t q : members[ds.labels[t]])
    if (q != t) cands.push_back({metric(ds.inputs[t], ds.inputs[q]), q});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.dist != b.dist ? a.dist > b.dist : a.idx < b.idx;
  });
  if (cands.size() > k) cands.resize(k);
  std::vector<Pair> out;
  for (const Cand& c : cands) out.push_back({t, c.idx, true});
  return out;
}

inline void require_all_classes(const std::vector<std::vector<std::size_t>>& members) {
  if (members.size() < 2)
    throw DataError(DataError::Kind::Degenerate, "nearest-other-class pairs need at least 2 classes");
  for (std::size_t c = 0; c < members.size(); ++c)
    if (members[c].empty())
      throw DataError(DataError::Kind::Degenerate, "class " + std::to_string(c) + " has no members");
}

}  // namespace detail

// For every example, one pair to the nearest member of each other class.
template <class Metric = EuclideanMetric>
std::vector<Pair> build_heuristic_d(const LabeledDataset& ds, const Metric& metric = {}) {
  validate(ds);
  const auto members = detail::members_by_class(ds);
  detail::require_all_classes(members);
  std::vector<Pair> out;
  out.reserve((members.size() - 1) * ds.size());
  for (std::size_t t = 0; t < ds.size(); ++t) {
    auto p = detail::nearest_other_class(ds, t, members, metric);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

// For every example, pairs to its k farthest same-class members (self excluded).
template <class Metric = EuclideanMetric>
std::vector<Pair> build_heuristic_c(const LabeledDataset& ds, std::size_t k, const Metric& metric = {}) {
  if (k == 0) throw ConfigError("heuristic k must be at least 1");
  validate(ds);
  const auto members = detail::members_by_class(ds);
  std::vector<Pair> out;
  for (std::size_t t = 0; t < ds.size(); ++t) {
    auto p = detail::farthest_same_class(ds, t, k, members, metric);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

// Both heuristics combined; per example the same-class pairs come first
// (farthest first) followed by the cross-class pairs in class-id order.
template <class Metric = EuclideanMetric>
PairList build_heuristic(const LabeledDataset& ds, std::size_t k, const Metric& metric = {}) {
  if (k == 0) throw ConfigError("heuristic k must be at least 1");
  validate(ds);
  const auto members = detail::members_by_class(ds);
  detail::require_all_classes(members);
  PairList list;
  list.mode = PairMode::HeuristicDC;
  for (std::size_t t = 0; t < ds.size(); ++t) {
    auto c = detail::farthest_same_class(ds, t, k, members, metric);
    auto d = detail::nearest_other_class(ds, t, members, metric);
    list.m_c += c.size();
    list.m_d += d.size();
    list.pairs.insert(list.pairs.end(), c.begin(), c.end());
    list.pairs.insert(list.pairs.end(), d.begin(), d.end());
  }
  return list;
}

// CSV dump: a `# m_c=..., m_d=..., mode=...` comment, a header, then rows.
inline std::string pairs_to_csv(const PairList& list) {
  std::string out = "# m_c=" + std::to_string(list.m_c) + ",m_d=" + std::to_string(list.m_d) +
                    ",mode=" + (list.mode == PairMode::Full ? "full" : "heuristic") + "\n";
  out += "t,u,same_class\n";
  for (const Pair& p : list.pairs)
    out += std::to_string(p.t) + "," + std::to_string(p.u) + "," + (p.same_class ? "1" : "0") + "\n";
  return out;
}

}  // namespace senns

#endif  // SENNS_PAIRS_HPP
