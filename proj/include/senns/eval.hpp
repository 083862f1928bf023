#ifndef SENNS_EVAL_HPP
#define SENNS_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "senns/data.hpp"
#include "senns/error.hpp"
#include "senns/matrix.hpp"

namespace senns {

// Euclidean k-nearest-neighbour vote. Equal distances keep the earlier
// training index; vote ties go to the smallest class id.
inline std::vector<ClassId> knn_classify(const std::vector<Vector>& train_features, const std::vector<ClassId>& train_labels,
                                         const std::vector<Vector>& test_features, std::size_t k) {
  if (k == 0) throw ConfigError("k must be at least 1");
  if (train_features.empty()) throw DataError(DataError::Kind::Empty, "kNN training set is empty");
  if (train_labels.size() != train_features.size())
    throw DataError(DataError::Kind::CountMismatch, "kNN features and labels differ in count");
  const std::size_t d = train_features.front().size();
  ClassId n_classes = 0;
  for (ClassId c : train_labels) n_classes = std::max(n_classes, c + 1);

  std::vector<ClassId> predicted;
  predicted.reserve(test_features.size());
  std::vector<std::pair<double, std::size_t>> dist(train_features.size());
  std::vector<std::size_t> votes(n_classes);
  for (const Vector& x : test_features) {
    if (x.size() != d) throw DimensionError("kNN query", d, x.size());
    for (std::size_t i = 0; i < train_features.size(); ++i) {
      if (train_features[i].size() != d) throw DimensionError("kNN training vector", d, train_features[i].size());
      dist[i] = {squared_distance(x, train_features[i]), i};
    }
    const std::size_t kk = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t i = 0; i < kk; ++i) ++votes[train_labels[dist[i].second]];
    // max_element returns the first maximum, i.e. the smallest class id.
    predicted.push_back(static_cast<ClassId>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
  }
  return predicted;
}

inline double accuracy(const std::vector<ClassId>& predicted, const std::vector<ClassId>& truth) {
  if (predicted.size() != truth.size() || truth.empty()) throw DataError(DataError::Kind::CountMismatch, "accuracy needs matching non-empty label lists");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

// Leave-one-out kNN accuracy over a single labelled feature set.
inline double knn_loo_accuracy(const LabeledDataset& ds, std::size_t k) {
  validate(ds);
  if (ds.size() < 2) throw DataError(DataError::Kind::Degenerate, "leave-one-out needs at least 2 examples");
  std::size_t hit = 0;
  std::vector<Vector> train;
  std::vector<ClassId> labels;
  for (std::size_t t = 0; t < ds.size(); ++t) {
    train.clear();
    labels.clear();
    for (std::size_t u = 0; u < ds.size(); ++u)
      if (u != t) {
        train.push_back(ds.inputs[u]);
        labels.push_back(ds.labels[u]);
      }
    hit += knn_classify(train, labels, {ds.inputs[t]}, k).front() == ds.labels[t];
  }
  return static_cast<double>(hit) / static_cast<double>(ds.size());
}

 // Mean squared distance over same-class ordered pairs (self excluded)
 // divided by the mean over different-class ordered pairs. Returns +inf
 // when every different-class pair is at distance 0.
inline double scatter_ratio(const std::vector<Vector>& features, const std::vector<ClassId>& labels) {
  if (features.size() != labels.size()) throw DataError(DataError::Kind::CountMismatch, "features and labels differ in count");
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t t = 0; t < features.size(); ++t)
    for (std::size_t u = 0; u < features.size(); ++u) {
      if (t == u) continue;
      const double d2 = squared_distance(features[t], features[u]);
      if (labels[t] == labels[u]) {
        intra += d2;
        ++n_intra;
      } else {
        inter += d2;
        ++n_inter;
      }
    }
  if (n_inter == 0) throw DataError(DataError::Kind::Degenerate, "scatter ratio needs at least two classes");
  const double intra_mean = n_intra ? intra / static_cast<double>(n_intra) : 0.0;
  const double inter_mean = inter / static_cast<double>(n_inter);
  if (inter_mean == 0.0) return std::numeric_limits<double>::infinity();
  return intra_mean / inter_mean;
}

struct SparsityMetrics {
  double mean_l1 = 0.0;
  double near_zero_fraction = 0.0;
};

inline SparsityMetrics sparsity_metrics(const std::vector<Vector>& features, double epsilon = 1e-3) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  SparsityMetrics s;
  if (features.empty()) return s;
  std::size_t entries = 0, near_zero = 0;
  for (const Vector& v : features) {
    s.mean_l1 += l1_norm(v);
    for (double x : v) near_zero += std::abs(x) < epsilon;
    entries += v.size();
  }
  s.mean_l1 /= static_cast<double>(features.size());
  s.near_zero_fraction = entries ? static_cast<double>(near_zero) / static_cast<double>(entries) : 0.0;
  return s;
}

struct EvalReport {
  double knn_accuracy = 0.0;
  double scatter_ratio = 0.0;
  double mean_l1 = 0.0;
  double near_zero_fraction = 0.0;
  std::size_t k = 1;
};

// Leave-one-out kNN plus the separation and sparsity metrics of one feature set.
inline EvalReport evaluate(const LabeledDataset& features, std::size_t k, double epsilon = 1e-3) {
  EvalReport r;
  r.k = k;
  r.knn_accuracy = knn_loo_accuracy(features, k);
  r.scatter_ratio = scatter_ratio(features.inputs, features.labels);
  const SparsityMetrics s = sparsity_metrics(features.inputs, epsilon);
  r.mean_l1 = s.mean_l1;
  r.near_zero_fraction = s.near_zero_fraction;
  return r;
}

inline std::string to_key_value(const EvalReport& r) {
  return "knn_k=" + std::to_string(r.k) + "\nknn_accuracy=" + detail::csv_number(r.knn_accuracy) +
         "\nscatter_ratio=" + detail::csv_number(r.scatter_ratio) + "\nmean_l1=" + detail::csv_number(r.mean_l1) +
         "\nnear_zero_fraction=" + detail::csv_number(r.near_zero_fraction) + "\n";
}

inline std::string to_csv(const EvalReport& r) {
  return "knn_k,knn_accuracy,scatter_ratio,mean_l1,near_zero_fraction\n" + std::to_string(r.k) + "," +
         detail::csv_number(r.knn_accuracy) + "," + detail::csv_number(r.scatter_ratio) + "," +
         detail::csv_number(r.mean_l1) + "," + detail::csv_number(r.near_zero_fraction) + "\n";
}

}  // namespace senns

#endif  // SENNS_EVAL_HPP
