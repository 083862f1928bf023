#ifndef SENNS_OBJECTIVE_HPP
#define SENNS_OBJECTIVE_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "senns/data.hpp"
#include "senns/error.hpp"
#include "senns/network.hpp"
#include "senns/pairs.hpp"

namespace senns {

// Regularisation weights and descent settings.
struct Hyperparams {
  double lambda1 = 0.4;  // same-class attraction
  double lambda2 = 0.4;  // different-class repulsion
  double lambda3 = 0.1;  // output L1 sparsity
  double lambda4 = 0.1;  // weight decay
  double alpha = 0.01;
  std::size_t max_iters = 500;
  double tol = 1e-8;
};

inline void validate(const Hyperparams& hp) {
  const double ls[] = {hp.lambda1, hp.lambda2, hp.lambda3, hp.lambda4};
  for (int i = 0; i < 4; ++i)
    if (!(ls[i] >= 0.0 && ls[i] <= 1.0))
      throw ConfigError("lambda" + std::to_string(i + 1) + " must lie in [0, 1]");
  const double sum = ls[0] + ls[1] + ls[2] + ls[3];
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("lambdas must sum to 1 (got " + std::to_string(sum) + ")");
  if (!(hp.alpha >= 0.0) || !std::isfinite(hp.alpha)) throw ConfigError("learning rate must be finite and non-negative");
  if (!(hp.tol > 0.0)) throw ConfigError("tolerance must be positive");
}

// Pair weight: lambda1/M_C for a same-class pair, -lambda2/M_D otherwise.
inline double s_weight(bool same, const Hyperparams& hp, std::size_t m_c, std::size_t m_d) {
  if (same) {
    if (m_c == 0) throw DataError(DataError::Kind::Degenerate, "same-class pair weight requested but M_C is 0");
    return hp.lambda1 / static_cast<double>(m_c);
  }
  if (m_d == 0)
    throw DataError(DataError::Kind::Degenerate, "different-class pair weight requested but M_D is 0 (single class?)");
  return -hp.lambda2 / static_cast<double>(m_d);
}

inline double s_weight(ClassId a, ClassId b, const Hyperparams& hp, std::size_t m_c, std::size_t m_d) {
  return s_weight(same_class(a, b) == 1, hp, m_c, m_d);
}

 // J and its parts. `j1` is the weighted pairwise term, `j2` the sparsity
 // term and `j3` the weight decay. `j1_same` / `j1_diff` recompute `j1` as
 // the separate attraction and (negative) repulsion sums.
struct ObjectiveValue {
  double j_total = 0.0;
  double j1 = 0.0;
  double j2 = 0.0;
  double j3 = 0.0;
  double j1_same = 0.0;
  double j1_diff = 0.0;
};

inline double weight_decay_term(const Network& net, double lambda4) {
  double s = 0.0;
  for (const Matrix& w : net.weights)
    for (double v : w.flat()) s += v * v;
  return 0.5 * lambda4 * s;
}

// J from already computed output vectors, one per example.
inline ObjectiveValue objective_from_outputs(const Network& net, const std::vector<Vector>& outputs,
                                             const PairList& pairs, const Hyperparams& hp) {
  ObjectiveValue v;
  double weighted = 0.0;
  double same_sum = 0.0;
  double diff_sum = 0.0;
  for (const Pair& p : pairs.pairs) {
    const double d2 = squared_distance(outputs[p.t], outputs[p.u]);
    weighted += s_weight(p.same_class, hp, pairs.m_c, pairs.m_d) * d2;
    (p.same_class ? same_sum : diff_sum) += d2;
  }
  v.j1 = 0.5 * weighted;
  v.j1_same = pairs.m_c ? hp.lambda1 / (2.0 * static_cast<double>(pairs.m_c)) * same_sum : 0.0;
  v.j1_diff = pairs.m_d ? -hp.lambda2 / (2.0 * static_cast<double>(pairs.m_d)) * diff_sum : 0.0;

  double l1 = 0.0;
  for (const Vector& a : outputs) l1 += l1_norm(a);
  v.j2 = hp.lambda3 / static_cast<double>(outputs.size()) * l1;
  v.j3 = weight_decay_term(net, hp.lambda4);
  v.j_total = v.j1 + v.j2 + v.j3;
  return v;
}

inline std::vector<Vector> compute_outputs(const Network& net, const LabeledDataset& ds) {
  std::vector<Vector> outputs;
  outputs.reserve(ds.size());
  for (const Vector& x : ds.inputs) outputs.push_back(predict(net, x));
  return outputs;
}

inline ObjectiveValue objective_value(const Network& net, const LabeledDataset& ds, const PairList& pairs,
                                      const Hyperparams& hp) {
  return objective_from_outputs(net, compute_outputs(net, ds), pairs, hp);
}

}  // namespace senns

#endif  // SENNS_OBJECTIVE_HPP
