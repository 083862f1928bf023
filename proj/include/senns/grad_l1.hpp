#ifndef SENNS_GRAD_L1_HPP
#define SENNS_GRAD_L1_HPP

#include <span>
#include <vector>

#include "senns/backprop.hpp"
#include "senns/network.hpp"

namespace senns {

// +1, -1 or 0; sign(0) = 0 is the subgradient used at the L1 kink.
constexpr double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// beta[l] holds the signed derivatives of layer l+2.
struct SignedDeltaStack {
  std::vector<Vector> beta;
};

 // Backward recursion seeded with beta_out[i] = factor[i] * f'(z_out[i]).
 // With factor = sign(a) this is the L1 backprop; with factor = a - y it
 // degenerates to ordinary squared-error backprop.
inline SignedDeltaStack signed_deltas(const Network& net, const ForwardTrace& trace, std::span<const double> factor) {
  if (factor.size() != net.output_size()) throw DimensionError("output factor", net.output_size(), factor.size());
  const std::size_t depth = net.weights.size();
  SignedDeltaStack s;
  s.beta.resize(depth);
  Vector& top = s.beta[depth - 1];
  top.resize(net.output_size());
  for (std::size_t i = 0; i < top.size(); ++i)
    top[i] = factor[i] * transfer_derivative(net.transfer[depth - 1], trace.z[depth - 1][i]);
  // beta^(l)_i = sum_j beta^(l+1)_j W^(l)_ji f'(z^(l)_i), sum over the s_{l+1} units above.
  for (std::size_t l = depth - 1; l > 0; --l) {
    const Matrix& w = net.weights[l];
    const Vector& above = s.beta[l];
    Vector& cur = s.beta[l - 1];
    cur.assign(w.cols(), 0.0);
    for (std::size_t i = 0; i < w.cols(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < w.rows(); ++j) acc += above[j] * w(j, i);
      cur[i] = acc * transfer_derivative(net.transfer[l - 1], trace.z[l - 1][i]);
    }
  }
  return s;
}

// dW^(l)_ij = beta^(l+1)_i a^(l)_j and db^(l)_i = beta^(l+1)_i.
inline GradientBuffer gradient_from_deltas(const Network& net, const ForwardTrace& trace, const SignedDeltaStack& s) {
  GradientBuffer g = GradientBuffer::zeros_like(net);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Vector& beta = s.beta[l];
    const Vector& below = trace.a[l];
    for (std::size_t i = 0; i < beta.size(); ++i) {
      for (std::size_t j = 0; j < below.size(); ++j) g.dW[l](i, j) = beta[i] * below[j];
      g.db[l][i] = beta[i];
    }
  }
  return g;
}

// Gradient of ||a_out||_1 for the example behind `trace`.
inline GradientBuffer grad_j2_single(const Network& net, const ForwardTrace& trace) {
  const auto out = output_activations(trace);
  Vector signs(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) signs[i] = sign(out[i]);
  return gradient_from_deltas(net, trace, signed_deltas(net, trace, signs));
}

inline GradientBuffer grad_j2_single(const Network& net, std::span<const double> x) {
  return grad_j2_single(net, forward(net, x));
}

}  // namespace senns

#endif  // SENNS_GRAD_L1_HPP
