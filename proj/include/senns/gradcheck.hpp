#ifndef SENNS_GRADCHECK_HPP
#define SENNS_GRADCHECK_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "senns/data.hpp"
#include "senns/network.hpp"
#include "senns/objective.hpp"
#include "senns/pairs.hpp"
#include "senns/trainer.hpp"

namespace senns {

struct GradcheckSpec {
  std::vector<std::size_t> layer_sizes{3, 4, 2};
  std::vector<TransferKind> transfer;  // empty = default_transfers
  std::size_t m = 6;
  std::size_t classes = 2;
  Hyperparams hp{0.3, 0.3, 0.2, 0.2};
  double min_abs_output = 1e-3;
  double step = 1e-5;
};

struct GradcheckInstance {
  Network net;
  LabeledDataset data;
  PairList pairs;
  Hyperparams hp;
};

// Smallest |a_i| over every output of every example.
inline double min_abs_output(const Network& net, const LabeledDataset& ds) {
  double lo = std::numeric_limits<double>::infinity();
  for (const Vector& x : ds.inputs)
    for (double a : predict(net, x)) lo = std::min(lo, std::abs(a));
  return lo;
}

 // Random small instance: N(0,1) inputs, labels cycling over the classes,
 // random weights and biases. Draws are repeated from the same generator
 // until every output is at least `min_abs_output` away from zero, so the
 // L1 term is differentiable at the returned point.
inline GradcheckInstance make_gradcheck_instance(const GradcheckSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  GradcheckInstance inst;
  inst.hp = spec.hp;
  for (std::size_t t = 0; t < spec.m; ++t) {
    Vector x(spec.layer_sizes.front());
    for (double& v : x) v = gauss(rng);
    inst.data.inputs.push_back(std::move(x));
    inst.data.labels.push_back(t % spec.classes);
  }
  inst.pairs = build_full(inst.data);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    inst.net = make_network(spec.layer_sizes, spec.transfer);
    for (std::size_t l = 0; l < inst.net.weights.size(); ++l) {
      for (double& w : inst.net.weights[l].flat()) w = unif(rng);
      for (double& b : inst.net.biases[l]) b = 0.5 * unif(rng);
    }
    if (min_abs_output(inst.net, inst.data) > spec.min_abs_output) return inst;
  }
  throw ConfigError("could not draw a gradient-check instance with outputs away from zero");
}

struct GradcheckResult {
  GradientMismatch worst;
  bool passed = false;
};

// Analytic gradient vs central differences. `negate_analytic` flips the
// analytic sign to check that the comparison catches a wrong descent direction.
inline GradcheckResult run_gradcheck(const GradcheckInstance& inst, double step, double threshold,
                                     bool negate_analytic = false, const GradOptions& opts = {}) {
  GradientBuffer analytic = grad_total(inst.net, inst.data, inst.pairs, inst.hp, opts);
  if (negate_analytic) analytic.scale(-1.0);
  const GradientBuffer numeric = finite_diff_grad(inst.net, inst.data, inst.pairs, inst.hp, step);
  GradcheckResult r;
  r.worst = compare_gradients(analytic, numeric);
  r.passed = r.worst.max_rel_error <= threshold;
  return r;
}

}  // namespace senns

#endif  // SENNS_GRADCHECK_HPP
