#ifndef SENNS_TRAINER_HPP
#define SENNS_TRAINER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "senns/backprop.hpp"
#include "senns/data.hpp"
#include "senns/error.hpp"
#include "senns/grad_l1.hpp"
#include "senns/network.hpp"
#include "senns/objective.hpp"
#include "senns/pairs.hpp"

namespace senns {

struct GradOptions {
  // Reuse one forward trace per example for every pair in an iteration.
  // Off = run both forward passes for each pair, as a literal pair loop does.
  bool cache_traces = true;
  // Accumulate pair gradients in ascending pair-list order on one thread.
  bool reproducible = true;
  // Sum each example's S-weighted output differences over all its pairs and
  // backpropagate once per example. Same gradient as the per-pair loop (it
  // is linear in the output error), with m instead of 2|pairs| backward passes.
  bool aggregate_pairs = true;
  // Worker cap for the pair and per-example loops when not reproducible.
  unsigned threads = 1;
};

// The three parts of dJ, each already carrying its lambda factor.
struct GradientParts {
  GradientBuffer j1;  // sum over pairs of S(t,u) * dJ1hat
  GradientBuffer j2;  // (lambda3 / m) * sum over examples of dJ2hat
  GradientBuffer j3;  // lambda4 * W, zero for biases

  GradientBuffer total() const {
    GradientBuffer g = j1;
    g.add_scaled(j2, 1.0);
    g.add_scaled(j3, 1.0);
    return g;
  }
};

namespace detail {

template <class Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (workers == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    pool.emplace_back([&, w, lo, hi] {
      try {
        fn(w, lo, hi);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

inline GradientParts grad_parts(const Network& net, const LabeledDataset& ds, const PairList& pairs,
                                const Hyperparams& hp, const GradOptions& opts = {}) {
  const std::size_t m = ds.size();
  if (m == 0) throw DataError(DataError::Kind::Empty, "cannot compute a gradient over an empty dataset");
  if (ds.dim() != net.input_size()) throw DimensionError("dataset dimension vs network input", net.input_size(), ds.dim());

  std::vector<ForwardTrace> traces;
  if (opts.cache_traces || opts.aggregate_pairs || hp.lambda3 != 0.0) {
    traces.reserve(m);
    for (const Vector& x : ds.inputs) traces.push_back(forward(net, x));
  }

  const unsigned threads = opts.reproducible ? 1u : std::max(1u, opts.threads);
  GradientParts parts{GradientBuffer::zeros_like(net), GradientBuffer::zeros_like(net), GradientBuffer::zeros_like(net)};

  // J1: sum of S(t,u) times the pair gradient.
  if (opts.aggregate_pairs) {
    const std::size_t out_dim = net.output_size();
    std::vector<Vector> error(m, Vector(out_dim, 0.0));
    std::vector<char> touched(m, 0);
    for (const Pair& p : pairs.pairs) {
      const double s = s_weight(p.same_class, hp, pairs.m_c, pairs.m_d);
      if (s == 0.0 || p.t == p.u) continue;
      const Vector& at = traces[p.t].a.back();
      const Vector& au = traces[p.u].a.back();
      for (std::size_t i = 0; i < out_dim; ++i) {
        const double diff = s * (at[i] - au[i]);
        error[p.t][i] += diff;
        error[p.u][i] -= diff;
      }
      touched[p.t] = touched[p.u] = 1;
    }
    std::vector<GradientBuffer> partial(std::max<std::size_t>(1, std::min<std::size_t>(threads, m)),
                                        GradientBuffer::zeros_like(net));
    detail::parallel_chunks(m, threads, [&](std::size_t w, std::size_t lo, std::size_t hi) {
      for (std::size_t t = lo; t < hi; ++t)
        if (touched[t]) accumulate_backprop(net, traces[t], error[t], partial[w]);
    });
    for (const auto& g : partial) parts.j1.add_scaled(g, 1.0);
  } else {
    std::vector<GradientBuffer> partial(std::max<std::size_t>(1, std::min<std::size_t>(threads, pairs.size())),
                                        GradientBuffer::zeros_like(net));
    detail::parallel_chunks(pairs.size(), threads, [&](std::size_t w, std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k) {
        const Pair& p = pairs.pairs[k];
        const double s = s_weight(p.same_class, hp, pairs.m_c, pairs.m_d);
        if (s == 0.0 || p.t == p.u) continue;  // both contribute exactly zero
        const GradientBuffer g = opts.cache_traces ? grad_j1_pair(net, traces[p.t], traces[p.u])
                                                   : grad_j1_pair(net, ds.inputs[p.t], ds.inputs[p.u]);
        partial[w].add_scaled(g, s);
      }
    });
    for (const auto& g : partial) parts.j1.add_scaled(g, 1.0);
  }

  // J2: lambda3/m applied once to the summed L1 gradients.
  if (hp.lambda3 != 0.0) {
    std::vector<GradientBuffer> partial(std::max<std::size_t>(1, std::min<std::size_t>(threads, m)),
                                        GradientBuffer::zeros_like(net));
    detail::parallel_chunks(m, threads, [&](std::size_t w, std::size_t lo, std::size_t hi) {
      for (std::size_t t = lo; t < hi; ++t) partial[w].add_scaled(grad_j2_single(net, traces[t]), 1.0);
    });
    for (const auto& g : partial) parts.j2.add_scaled(g, 1.0);
    parts.j2.scale(hp.lambda3 / static_cast<double>(m));
  }

  // J3: lambda4 * W; biases are not decayed.
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto dst = parts.j3.dW[l].flat();
    auto src = net.weights[l].flat();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = hp.lambda4 * src[i];
  }
  return parts;
}

// Full-batch dJ/dW and dJ/db.
inline GradientBuffer grad_total(const Network& net, const LabeledDataset& ds, const PairList& pairs,
                                 const Hyperparams& hp, const GradOptions& opts = {}) {
  return grad_parts(net, ds, pairs, hp, opts).total();
}

// W <- W - alpha dW, b <- b - alpha db.
inline void apply_step(Network& net, const GradientBuffer& grad, double alpha) {
  if (!grad.same_shape(net)) throw DimensionError("gradient layer count", net.weights.size(), grad.dW.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto w = net.weights[l].flat();
    auto g = grad.dW[l].flat();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= alpha * g[i];
    for (std::size_t i = 0; i < net.biases[l].size(); ++i) net.biases[l][i] -= alpha * grad.db[l][i];
  }
}

inline Network sgd_step(const Network& net, const GradientBuffer& grad, double alpha) {
  Network next = net;
  apply_step(next, grad, alpha);
  return next;
}

// Central differences of the full objective, one parameter at a time.
inline GradientBuffer finite_diff_grad(const Network& net, const LabeledDataset& ds, const PairList& pairs,
                                       const Hyperparams& hp, double h = 1e-5) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
  GradientBuffer g = GradientBuffer::zeros_like(net);
  Network probe = net;
  auto central = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double plus = objective_value(probe, ds, pairs, hp).j_total;
    param = saved - h;
    const double minus = objective_value(probe, ds, pairs, hp).j_total;
    param = saved;
    return (plus - minus) / (2.0 * h);
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    auto w = probe.weights[l].flat();
    auto dw = g.dW[l].flat();
    for (std::size_t i = 0; i < w.size(); ++i) dw[i] = central(w[i]);
    for (std::size_t i = 0; i < probe.biases[l].size(); ++i) g.db[l][i] = central(probe.biases[l][i]);
  }
  return g;
}

// Where two gradients disagree the most.
struct GradientMismatch {
  double max_rel_error = 0.0;
  std::string coordinate;  // e.g. "W2[1,0]" or "b1[3]"
  double analytic = 0.0;
  double numeric = 0.0;
};

// Per-coordinate |a - b| / max(|a|, |b|, floor), maximised over all parameters.
inline GradientMismatch compare_gradients(const GradientBuffer& analytic, const GradientBuffer& numeric,
                                          double floor = 1e-6) {
  GradientMismatch worst;
  auto visit = [&](double a, double b, const std::string& name) {
    const double denom = std::max({std::abs(a), std::abs(b), floor});
    const double e = std::abs(a - b) / denom;
    if (worst.coordinate.empty() || !(e <= worst.max_rel_error)) worst = {e, name, a, b};  // NaN always wins
  };
  for (std::size_t l = 0; l < analytic.dW.size(); ++l) {
    const Matrix& a = analytic.dW[l];
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j)
        visit(a(i, j), numeric.dW[l](i, j),
              "W" + std::to_string(l + 1) + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
    for (std::size_t i = 0; i < analytic.db[l].size(); ++i)
      visit(analytic.db[l][i], numeric.db[l][i], "b" + std::to_string(l + 1) + "[" + std::to_string(i) + "]");
  }
  return worst;
}

struct TrainOptions {
  GradOptions grad;
  // Halve the step and retry whenever J would increase. Off by default.
  bool halve_on_increase = false;
};

struct TrainReport {
  std::vector<ObjectiveValue> history;  // J before the first step, then after each step
  Network network;
  std::size_t iterations_run = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  double final_alpha = 0.0;
};

 // Plain full-batch gradient descent with a fixed step. Stops once
 // |J_prev - J| / max(1, |J_prev|) <= tol or after max_iters steps.
 // tol = +inf therefore stops before the first step.
inline TrainReport train(const Network& initial, const LabeledDataset& ds, const PairList& pairs,
                         const Hyperparams& hp, std::uint64_t seed = 0, const TrainOptions& opts = {}) {
  validate(hp);
  validate(initial);
  TrainReport report;
  report.seed = seed;
  report.network = initial;
  double alpha = hp.alpha;

  ObjectiveValue current = objective_value(report.network, ds, pairs, hp);
  if (!std::isfinite(current.j_total)) throw NumericError("objective is not finite", 0);
  report.history.push_back(current);

  double last_change = std::numeric_limits<double>::infinity();
  while (!(last_change <= hp.tol) && report.iterations_run < hp.max_iters) {
    const std::size_t iter = report.iterations_run + 1;
    const GradientBuffer g = grad_total(report.network, ds, pairs, hp, opts.grad);
    if (!g.all_finite()) throw NumericError("gradient is not finite", iter);

    Network next = sgd_step(report.network, g, alpha);
    ObjectiveValue value = objective_value(next, ds, pairs, hp);
    if (opts.halve_on_increase) {
      for (int tries = 0; tries < 60 && !(value.j_total <= current.j_total); ++tries) {
        alpha *= 0.5;
        next = sgd_step(report.network, g, alpha);
        value = objective_value(next, ds, pairs, hp);
      }
    }
    if (!std::isfinite(value.j_total) || !all_finite_parameters(next)) throw NumericError("objective is not finite", iter);

    last_change = std::abs(current.j_total - value.j_total) / std::max(1.0, std::abs(current.j_total));
    report.network = std::move(next);
    current = value;
    report.history.push_back(current);
    report.iterations_run = iter;
  }
  report.converged = last_change <= hp.tol;
  report.final_alpha = alpha;
  return report;
}

// `iter,J,J1,J2,J3`, one row per recorded objective value.
inline std::string telemetry_csv(const TrainReport& report) {
  std::string out = "iter,J,J1,J2,J3\n";
  for (std::size_t k = 0; k < report.history.size(); ++k) {
    const ObjectiveValue& v = report.history[k];
    out += std::to_string(k) + "," + detail::csv_number(v.j_total) + "," + detail::csv_number(v.j1) + "," +
           detail::csv_number(v.j2) + "," + detail::csv_number(v.j3) + "\n";
  }
  return out;
}

}  // namespace senns

#endif  // SENNS_TRAINER_HPP
