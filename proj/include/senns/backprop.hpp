#ifndef SENNS_BACKPROP_HPP
#define SENNS_BACKPROP_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "senns/error.hpp"
#include "senns/matrix.hpp"
#include "senns/network.hpp"

namespace senns {

// dJ/dW and dJ/db laid out exactly like the network parameters.
struct GradientBuffer {
  std::vector<Matrix> dW;
  std::vector<Vector> db;

  static GradientBuffer zeros_like(const Network& net) {
    GradientBuffer g;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      g.dW.emplace_back(net.weights[l].rows(), net.weights[l].cols());
      g.db.emplace_back(net.biases[l].size(), 0.0);
    }
    return g;
  }

  // this += s * other
  void add_scaled(const GradientBuffer& other, double s) {
    for (std::size_t l = 0; l < dW.size(); ++l) {
      auto dst = dW[l].flat();
      auto src = other.dW[l].flat();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
      for (std::size_t i = 0; i < db[l].size(); ++i) db[l][i] += s * other.db[l][i];
    }
  }

  void scale(double s) {
    for (std::size_t l = 0; l < dW.size(); ++l) {
      for (double& v : dW[l].flat()) v *= s;
      for (double& v : db[l]) v *= s;
    }
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < dW.size(); ++l)
      if (!senns::all_finite(dW[l].flat()) || !senns::all_finite(db[l])) return false;
    return true;
  }

  bool same_shape(const Network& net) const {
    if (dW.size() != net.weights.size() || db.size() != net.biases.size()) return false;
    for (std::size_t l = 0; l < dW.size(); ++l)
      if (dW[l].rows() != net.weights[l].rows() || dW[l].cols() != net.weights[l].cols() ||
          db[l].size() != net.biases[l].size())
        return false;
    return true;
  }

  bool operator==(const GradientBuffer&) const = default;
};

 // Backpropagates an output-layer error vector (dJ/da at the output) through
 // one forward trace and adds the resulting parameter gradient to `into`.
inline void accumulate_backprop(const Network& net, const ForwardTrace& trace, std::span<const double> output_error,
                                GradientBuffer& into) {
  if (output_error.size() != net.output_size())
    throw DimensionError("backprop output error", net.output_size(), output_error.size());
  const std::size_t layers = net.weights.size();
  if (trace.z.size() != layers || trace.a.size() != layers + 1)
    throw DimensionError("forward trace depth", layers, trace.z.size());
  const Vector& z_out = trace.z.back();
  Vector delta(output_error.size());
  for (std::size_t i = 0; i < delta.size(); ++i)
    delta[i] = output_error[i] * transfer_derivative(net.transfer.back(), z_out[i]);
  for (std::size_t l = layers; l-- > 0;) {
    const Vector& below = trace.a[l];
    Matrix& dw = into.dW[l];
    for (std::size_t i = 0; i < dw.rows(); ++i) {
      auto row = dw.row(i);
      for (std::size_t j = 0; j < dw.cols(); ++j) row[j] += delta[i] * below[j];
      into.db[l][i] += delta[i];
    }
    if (l == 0) break;
    const Matrix& w = net.weights[l];
    Vector next(w.cols(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const auto wi = w.row(i);
      for (std::size_t j = 0; j < w.cols(); ++j) next[j] += wi[j] * delta[i];
    }
    for (std::size_t j = 0; j < next.size(); ++j) next[j] *= transfer_derivative(net.transfer[l - 1], trace.z[l - 1][j]);
    delta = std::move(next);
  }
}

 // Standard backpropagation of B(a; c) = 1/2 ||a - c||^2 for one example.
 // The target `c` is a constant: its dependence on the weights (if it came
 // from another forward pass) is deliberately ignored.
inline GradientBuffer backprop_sq(const Network& net, const ForwardTrace& trace, std::span<const double> target) {
  if (target.size() != net.output_size()) throw DimensionError("backprop target", net.output_size(), target.size());
  if (trace.a.empty() || trace.a.back().size() != target.size())
    throw DimensionError("forward trace output", target.size(), trace.a.empty() ? 0 : trace.a.back().size());
  const Vector& out = trace.a.back();
  Vector error(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) error[i] = out[i] - target[i];
  GradientBuffer g = GradientBuffer::zeros_like(net);
  accumulate_backprop(net, trace, error, g);
  return g;
}

// Gradient of 1/2 ||a(x_t) - a(x_u)||^2 from two already computed traces.
// Two backprop calls, each using the other example's output as the target.
inline GradientBuffer grad_j1_pair(const Network& net, const ForwardTrace& trace_t, const ForwardTrace& trace_u) {
  GradientBuffer g = backprop_sq(net, trace_t, output_activations(trace_u));
  g.add_scaled(backprop_sq(net, trace_u, output_activations(trace_t)), 1.0);
  return g;
}

// Same gradient, running both forward passes itself.
inline GradientBuffer grad_j1_pair(const Network& net, std::span<const double> x_t, std::span<const double> x_u) {
  const ForwardTrace trace_t = forward(net, x_t);
  const ForwardTrace trace_u = forward(net, x_u);
  return grad_j1_pair(net, trace_t, trace_u);
}

}  // namespace senns

#endif  // SENNS_BACKPROP_HPP
