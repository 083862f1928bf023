// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "senns/senns.hpp"

using namespace senns;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TransferKind random_kind(std::mt19937_64& rng) {
  static const TransferKind kinds[] = {TransferKind::Sigmoid, TransferKind::Tanh, TransferKind::Linear};
  return kinds[std::uniform_int_distribution<int>(0, 2)(rng)];
}

// Four positive weights summing to one, none smaller than 0.05 before normalising.
Hyperparams generic_lambdas(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double l[4];
  for (double& v : l) v = u(rng);
  const double sum = l[0] + l[1] + l[2] + l[3];
  Hyperparams hp;
  hp.lambda1 = l[0] / sum;
  hp.lambda2 = l[1] / sum;
  hp.lambda3 = l[2] / sum;
  hp.lambda4 = 1.0 - hp.lambda1 - hp.lambda2 - hp.lambda3;
  return hp;
}

std::vector<std::size_t> random_sizes(std::mt19937_64& rng, std::size_t max_layers, std::size_t max_units) {
  std::uniform_int_distribution<std::size_t> layers(2, max_layers), units(1, max_units);
  std::vector<std::size_t> sizes(layers(rng));
  for (std::size_t& s : sizes) s = units(rng);
  return sizes;
}

std::vector<Vector> features_of(const Network& net, const std::vector<Vector>& xs) {
  std::vector<Vector> out;
  out.reserve(xs.size());
  for (const Vector& x : xs) out.push_back(predict(net, x));
  return out;
}

Outcome gradient_oracle_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  std::string where;
  for (int c = 0; c < 100; ++c) {
    GradcheckSpec spec;
    spec.layer_sizes = random_sizes(rng, 3, 5);
    spec.transfer.clear();
    for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) spec.transfer.push_back(random_kind(rng));
    spec.m = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    spec.classes = std::uniform_int_distribution<std::size_t>(2, std::min<std::size_t>(3, spec.m))(rng);
    spec.hp = generic_lambdas(rng);
    const GradcheckInstance inst = make_gradcheck_instance(spec, rng());
    const GradcheckResult r = run_gradcheck(inst, 1e-5, 1e-4);
    if (!(r.worst.max_rel_error <= worst)) {
      worst = r.worst.max_rel_error;
      where = "config " + std::to_string(c) + " " + r.worst.coordinate;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 30.0,
          "100 configs, max rel error " + fmt(worst) + " at " + where + ", " + fmt(secs) + " s"};
}

Outcome component_oracles() {
  // Complex-step derivatives: no subtraction, so the oracle is exact to
  // rounding even on coordinates whose gradient is close to zero.
  using C = std::complex<double>;
  std::mt19937_64 rng(77);
  double worst_pair = 0.0, worst_l1 = 0.0;
  for (int c = 0; c < 50; ++c) {
    const auto sizes = random_sizes(rng, 4, 5);
    std::vector<TransferKind> kinds;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) kinds.push_back(random_kind(rng));
    const Network net = oracle::random_net(sizes, kinds, rng);
    const Vector xt = oracle::random_vector(sizes.front(), rng);
    const Vector xu = oracle::random_vector(sizes.front(), rng);
    const GradientBuffer reference = oracle::complex_step_gradient(net, [&](const oracle::ComplexForward& fwd) {
      const auto at = fwd(xt), au = fwd(xu);
      C s = 0.0;
      for (std::size_t i = 0; i < at.size(); ++i) s += (at[i] - au[i]) * (at[i] - au[i]);
      return 0.5 * s;
    });
    worst_pair = std::max(worst_pair, oracle::max_rel_error(grad_j1_pair(net, xt, xu), reference));
  }
  int drawn = 0;
  for (int c = 0; c < 50; ++drawn) {
    const auto sizes = random_sizes(rng, 4, 5);
    std::vector<TransferKind> kinds;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) kinds.push_back(random_kind(rng));
    const Network net = oracle::random_net(sizes, kinds, rng);
    const Vector x = oracle::random_vector(sizes.front(), rng);
    const Vector out = oracle::forward_output(net, x);
    if (std::any_of(out.begin(), out.end(), [](double a) { return std::abs(a) <= 1e-3; })) continue;  // kink
    // Away from zero |a| is a with a fixed sign, which is analytic.
    const GradientBuffer reference = oracle::complex_step_gradient(net, [&](const oracle::ComplexForward& fwd) {
      const auto a = fwd(x);
      C s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += out[i] > 0 ? a[i] : -a[i];
      return s;
    });
    worst_l1 = std::max(worst_l1, oracle::max_rel_error(grad_j2_single(net, x), reference));
    ++c;
  }
  return {worst_pair <= 1e-6 && worst_l1 <= 1e-6,
          "pair term max rel error " + fmt(worst_pair) + ", L1 term " + fmt(worst_l1) + " (50 cases each, " +
              std::to_string(drawn - 50) + " kink draws skipped)"};
}

Outcome brute_force_objective() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  std::size_t instances = 0;
  for (std::size_t m = 2; m <= 20; ++m)
    for (int rep = 0; rep < 3; ++rep) {
      const std::size_t classes = std::uniform_int_distribution<std::size_t>(2, std::min<std::size_t>(4, m))(rng);
      LabeledDataset ds;
      for (std::size_t t = 0; t < m; ++t) {
        ds.inputs.push_back(oracle::random_vector(3, rng));
        ds.labels.push_back(t < classes ? t : std::uniform_int_distribution<std::size_t>(0, classes - 1)(rng));
      }
      const Network net = oracle::random_net({3, 4, 2}, {random_kind(rng), random_kind(rng)}, rng);
      const Hyperparams hp = generic_lambdas(rng);
      std::vector<PairList> lists{build_full(ds), build_full(ds, true)};
      lists.push_back(build_heuristic(ds, 1 + rep));
      for (const PairList& list : lists) {
        // The brute force recounts its own normalisers from the pair multiset.
        const auto mult = oracle::multiplicity_of(list);
        double mc = 0.0, md = 0.0;
        for (std::size_t t = 0; t < m; ++t)
          for (std::size_t u = 0; u < m; ++u) (ds.labels[t] == ds.labels[u] ? mc : md) += mult(t, u);
        const double ref = oracle::brute_objective(net, ds, mult, mc, md, hp).total();
        const double got = objective_value(net, ds, list, hp).j_total;
        worst = std::max(worst, std::abs(got - ref) / std::max(std::abs(ref), 1e-300));
        ++instances;
      }
    }
  LabeledDataset aab;
  aab.inputs = {{0.0}, {1.0}, {2.0}};
  aab.labels = {0, 0, 1};
  const PairList full = build_full(aab);
  const bool counts_ok = full.m_c == 5 && full.m_d == 4;
  return {worst <= 1e-12 && counts_ok, std::to_string(instances) + " instances (m = 2..20), max rel diff " + fmt(worst) +
                                           "; labels [A,A,B] give M_C=" + std::to_string(full.m_c) +
                                           ", M_D=" + std::to_string(full.m_d)};
}

Outcome heuristic_counts() {
  std::mt19937_64 rng(11);
  int ok = 0;
  std::string first_bad;
  for (int c = 0; c < 20; ++c) {
    const std::size_t classes = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    LabeledDataset ds;
    for (ClassId k = 0; k < classes; ++k) {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 9)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        ds.inputs.push_back(oracle::random_vector(2, rng));
        ds.labels.push_back(k);
      }
    }
    std::shuffle(ds.labels.begin(), ds.labels.end(), rng);  // class sizes stay, membership moves
    const std::size_t m = ds.size();
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const std::size_t nd = build_heuristic_d(ds).size();
    const std::size_t nc = build_heuristic_c(ds, k).size();
    if (nd == (classes - 1) * m && nc <= k * m)
      ++ok;
    else if (first_bad.empty())
      first_bad = "; structure " + std::to_string(c) + " gave " + std::to_string(nd) + " / " + std::to_string(nc);
  }
  return {ok == 20, std::to_string(ok) + "/20 class structures with |D| = (N-1)m and |C| <= km" + first_bad};
}

Outcome descent_property() {
  const LabeledDataset ds = make_gaussians(20, {{-1.0, 0.0}, {1.0, 0.5}}, 0.6, 4);
  const PairList pairs = build_full(ds);
  const Network init = init_random({2, 4, 2}, default_transfers(3), 9);
  Hyperparams hp;  // 0.4, 0.4, 0.1, 0.1
  hp.max_iters = 200;
  hp.tol = std::numeric_limits<double>::min();
  double chosen = 0.0;
  std::size_t tried = 0;
  for (double alpha = 0.1; alpha > 1e-6 && chosen == 0.0; alpha *= 0.5, ++tried) {
    hp.alpha = alpha;
    const TrainReport r = train(init, ds, pairs, hp);
    bool monotone = r.iterations_run == 200;
    for (std::size_t k = 1; k < r.history.size(); ++k) monotone = monotone && r.history[k].j_total <= r.history[k - 1].j_total;
    if (monotone) chosen = alpha;
  }

  Hyperparams decay{0.0, 0.0, 0.0, 1.0};
  decay.alpha = 0.05;
  decay.max_iters = 50;
  decay.tol = std::numeric_limits<double>::min();
  const TrainReport r = train(init, ds, pairs, decay);
  const double factor = std::pow(1.0 - decay.alpha, 50);
  double worst = 0.0;
  for (std::size_t l = 0; l < init.weights.size(); ++l) {
    const auto w0 = init.weights[l].flat();
    const auto w = r.network.weights[l].flat();
    for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, std::abs(w[i] - w0[i] * factor));
  }
  return {chosen > 0.0 && worst <= 1e-10 && r.iterations_run == 50,
          "J non-increasing over 200 iterations at alpha=" + fmt(chosen) + " (" + std::to_string(tried) +
              " step sizes tried); pure decay off closed form by " + fmt(worst)};
}

// Two-moons setup shared by the separability and sparsity criteria.
struct MoonsSetup {
  LabeledDataset data;
  PairList pairs;
  Network init;
};

MoonsSetup moons_setup() {
  MoonsSetup s;
  s.data = make_two_moons(100, 0.1, 7);
  fit_standardizer(s.data).apply(s.data);
  s.pairs = build_full(s.data);
  s.init = init_random({2, 64, 2}, {TransferKind::Tanh, TransferKind::Tanh}, 1);
  return s;
}

TrainReport train_moons(const MoonsSetup& s, const Hyperparams& base) {
  Hyperparams hp = base;
  hp.alpha = 1.0;
  hp.max_iters = 500;
  TrainOptions opts;
  opts.halve_on_increase = true;
  return train(s.init, s.data, s.pairs, hp, 1, opts);
}

Outcome separability() {
  const auto t0 = std::chrono::steady_clock::now();
  const MoonsSetup s = moons_setup();
  const TrainReport r = train_moons(s, Hyperparams{0.4, 0.4, 0.1, 0.1});
  const double before = scatter_ratio(features_of(s.init, s.data.inputs), s.data.labels);
  const double after = scatter_ratio(features_of(r.network, s.data.inputs), s.data.labels);
  const double secs = seconds_since(t0);
  return {after <= 0.5 * before && secs < 60.0, "scatter ratio " + fmt(before) + " -> " + fmt(after) + " (x" +
                                                    fmt(after / before) + ") in " + std::to_string(r.iterations_run) +
                                                    " iterations, " + fmt(secs) + " s"};
}

Outcome sparsity_response() {
  const MoonsSetup s = moons_setup();
  const double lambda4 = 0.1;
  std::vector<double> mean_l1;
  std::string detail = "mean L1";
  for (double lambda3 : {0.0, 0.2, 0.4}) {
    const double rest = (1.0 - lambda3 - lambda4) / 2.0;
    const TrainReport r = train_moons(s, Hyperparams{rest, rest, lambda3, lambda4});
    mean_l1.push_back(sparsity_metrics(features_of(r.network, s.data.inputs)).mean_l1);
    detail += " " + fmt(mean_l1.back()) + " (lambda3=" + fmt(lambda3) + ")";
  }
  return {mean_l1[1] <= mean_l1[0] && mean_l1[2] <= mean_l1[1], detail};
}

Outcome mnist_desk_scale() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string dir = SENNS_TEST_DATA_DIR "/mnist/";
  const LabeledDataset all = load_idx(dir + "images-idx3-ubyte", dir + "labels-idx1-ubyte");
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(2024);
  std::shuffle(order.begin(), order.end(), rng);
  LabeledDataset train_set, test_set;
  train_set.class_names = test_set.class_names = all.class_names;
  for (std::size_t i = 0; i < 300; ++i) {
    LabeledDataset& dst = i < 200 ? train_set : test_set;
    dst.inputs.push_back(all.inputs[order[i]]);
    dst.labels.push_back(all.labels[order[i]]);
  }
  const double raw = accuracy(knn_classify(train_set.inputs, train_set.labels, test_set.inputs, 1), test_set.labels);

  // Small steps: with 784 raw inputs larger ones saturate the tanh codes within a few iterations.
  Hyperparams hp{0.5, 0.49, 0.005, 0.005};
  hp.alpha = 0.001;
  hp.max_iters = 100;
  TrainOptions opts;
  opts.halve_on_increase = true;
  const Network init = init_random({784, 128}, {TransferKind::Tanh}, 1);
  const TrainReport r = train(init, train_set, build_full(train_set), hp, 1, opts);
  const double learned = accuracy(knn_classify(features_of(r.network, train_set.inputs), train_set.labels,
                                               features_of(r.network, test_set.inputs), 1),
                                  test_set.labels);
  const double secs = seconds_since(t0);
  return {learned >= raw - 0.05 && secs < 120.0, "1-NN accuracy raw " + fmt(raw) + ", learned " + fmt(learned) +
                                                       " after " + std::to_string(r.iterations_run) + " iterations, " +
                                                       fmt(secs) + " s"};
}

Outcome conformance() {
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  std::mt19937_64 rng(3);
  LabeledDataset ds;
  for (std::size_t t = 0; t < 7; ++t) {
    ds.inputs.push_back(oracle::random_vector(3, rng));
    ds.labels.push_back(t % 3 == 0 ? 1 : 0);
  }
  const PairList pairs = build_full(ds);
  const Network net = oracle::random_net({3, 4, 2}, {TransferKind::Tanh, TransferKind::Sigmoid}, rng);
  const double m = static_cast<double>(ds.size());

  // Two-branch pair weight.
  const Hyperparams hp{0.3, 0.2, 0.25, 0.25};
  check(s_weight(true, hp, pairs.m_c, pairs.m_d) == 0.3 / static_cast<double>(pairs.m_c), "same-class weight");
  check(s_weight(false, hp, pairs.m_c, pairs.m_d) == -0.2 / static_cast<double>(pairs.m_d), "different-class weight");
  GradientBuffer repulsion = GradientBuffer::zeros_like(net);
  for (const Pair& p : pairs.pairs)
    if (!p.same_class) repulsion.add_scaled(grad_j1_pair(net, ds.inputs[p.t], ds.inputs[p.u]), -1.0 / static_cast<double>(pairs.m_d));
  const GradientBuffer g_repel = grad_total(net, ds, pairs, Hyperparams{0, 1, 0, 0});
  check(oracle::max_rel_error(g_repel, repulsion, 1e-4) <= 1e-12, "lambda2-only gradient is the negative cross-pair sum");
  check(!(g_repel == GradientBuffer::zeros_like(net)), "lambda2-only gradient is nonzero");

  // lambda3/m exactly once, in value and in gradient.
  const Hyperparams sparse_only{0, 0, 1, 0};
  double l1 = 0.0;
  for (const Vector& x : ds.inputs)
    for (double a : oracle::forward_output(net, x)) l1 += std::abs(a);
  check(std::abs(objective_value(net, ds, pairs, sparse_only).j2 - l1 / m) <= 1e-12 * l1, "J2 value uses 1/m once");
  GradientBuffer l1_sum = GradientBuffer::zeros_like(net);
  for (const Vector& x : ds.inputs) l1_sum.add_scaled(grad_j2_single(net, x), 1.0 / m);
  check(oracle::max_rel_error(grad_total(net, ds, pairs, sparse_only), l1_sum, 1e-4) <= 1e-12, "J2 gradient uses 1/m once");

  // lambda4 exactly once: value lambda4/2 sum W^2, gradient lambda4 W, one step scales W by (1 - alpha lambda4).
  const Hyperparams decay_mix{0.5, 0, 0, 0.5};
  LabeledDataset same = ds;
  for (Vector& x : same.inputs) x = ds.inputs[0];  // J1 and its gradient vanish
  double w2 = 0.0;
  for (const Matrix& w : net.weights)
    for (double v : w.flat()) w2 += v * v;
  check(std::abs(objective_value(net, same, build_full(same), decay_mix).j3 - 0.25 * w2) <= 1e-12 * w2, "J3 value");
  const GradientBuffer g_decay = grad_total(net, same, build_full(same), decay_mix);
  Network stepped = sgd_step(net, g_decay, 0.1);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const auto w = net.weights[l].flat();
    const auto gw = g_decay.dW[l].flat();
    const auto ws = stepped.weights[l].flat();
    for (std::size_t i = 0; i < w.size(); ++i) {
      check(gw[i] == 0.5 * w[i], "decay gradient is lambda4 W");
      check(std::abs(ws[i] - w[i] * 0.95) <= 1e-15, "one step scales W by 1 - alpha lambda4");
    }
    check(stepped.biases[l] == net.biases[l], "biases are not decayed");
  }
  std::sort(failures.begin(), failures.end());
  failures.erase(std::unique(failures.begin(), failures.end()), failures.end());
  std::string detail = "two-branch pair weight, lambda3/m once, lambda4 once";
  for (const auto& f : failures) detail += "; FAILED " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient oracle suite", gradient_oracle_suite},
      {"component oracles", component_oracles},
      {"brute-force objective", brute_force_objective},
      {"heuristic pair counts", heuristic_counts},
      {"descent property", descent_property},
      {"separability improvement", separability},
      {"sparsity response", sparsity_response},
      {"MNIST desk scale", mnist_desk_scale},
      {"weighting conformance", conformance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
