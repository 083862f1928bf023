#ifndef SENNS_NETWORK_HPP
#define SENNS_NETWORK_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "senns/error.hpp"
#include "senns/matrix.hpp"

namespace senns {

enum class TransferKind { Sigmoid, Tanh, Linear };

inline double transfer(TransferKind kind, double z) {
  switch (kind) {
    case TransferKind::Sigmoid:
      return 1.0 / (1.0 + std::exp(-z));
    case TransferKind::Tanh:
      return std::tanh(z);
    case TransferKind::Linear:
      return z;
  }
  return z;
}

// f'(z), written in terms of z so it is defined everywhere.
inline double transfer_derivative(TransferKind kind, double z) {
  switch (kind) {
    case TransferKind::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case TransferKind::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case TransferKind::Linear:
      return 1.0;
  }
  return 1.0;
}

inline std::string_view to_string(TransferKind kind) {
  switch (kind) {
    case TransferKind::Sigmoid:
      return "sigmoid";
    case TransferKind::Tanh:
      return "tanh";
    case TransferKind::Linear:
      return "linear";
  }
  return "linear";
}

inline TransferKind parse_transfer(std::string_view name) {
  if (name == "sigmoid") return TransferKind::Sigmoid;
  if (name == "tanh") return TransferKind::Tanh;
  if (name == "linear") return TransferKind::Linear;
  throw ConfigError("unknown transfer kind '" + std::string(name) + "'");
}

// Tanh on every hidden layer, Linear on the output layer.
inline std::vector<TransferKind> default_transfers(std::size_t num_layers) {
  std::vector<TransferKind> kinds(num_layers > 1 ? num_layers - 1 : 0, TransferKind::Tanh);
  if (!kinds.empty()) kinds.back() = TransferKind::Linear;
  return kinds;
}

 // Fully connected feedforward network with layers 1..n.
 //
 // `weights[l]` maps layer l+1 to layer l+2 (zero-based storage of W^(l+1)),
 // with shape layer_sizes[l+1] x layer_sizes[l]. `transfer[l]` is the
 // activation of layer l+2; the input layer has none.
struct Network {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::vector<TransferKind> transfer;

  std::size_t num_layers() const { return layer_sizes.size(); }
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  bool operator==(const Network&) const = default;
};

inline bool all_finite_parameters(const Network& net) {
  for (std::size_t l = 0; l < net.weights.size(); ++l)
    if (!all_finite(net.weights[l].flat()) || !all_finite(net.biases[l])) return false;
  return true;
}

// Throws ConfigError if the network breaks a structural invariant.
inline void validate(const Network& net) {
  const std::size_t n = net.num_layers();
  if (n < 2) throw ConfigError("network needs at least 2 layers");
  for (std::size_t s : net.layer_sizes)
    if (s == 0) throw ConfigError("layer size must be positive");
  if (net.weights.size() != n - 1 || net.biases.size() != n - 1 || net.transfer.size() != n - 1)
    throw ConfigError("network must have exactly one weight matrix, bias vector and transfer per layer pair");
  for (std::size_t l = 0; l + 1 < n; ++l) {
    const Matrix& w = net.weights[l];
    if (w.rows() != net.layer_sizes[l + 1] || w.cols() != net.layer_sizes[l])
      throw ConfigError("weight matrix " + std::to_string(l + 1) + " has the wrong shape");
    if (net.biases[l].size() != net.layer_sizes[l + 1])
      throw ConfigError("bias vector " + std::to_string(l + 1) + " has the wrong length");
  }
  if (!all_finite_parameters(net)) throw ConfigError("network has a non-finite parameter");
}

// Zero-initialised network of the given shape.
inline Network make_network(std::vector<std::size_t> layer_sizes, std::vector<TransferKind> transfer = {}) {
  Network net;
  if (transfer.empty()) transfer = default_transfers(layer_sizes.size());
  net.layer_sizes = std::move(layer_sizes);
  net.transfer = std::move(transfer);
  if (net.layer_sizes.size() < 2) throw ConfigError("network needs at least 2 layers");
  for (std::size_t s : net.layer_sizes)
    if (s == 0) throw ConfigError("layer size must be positive");
  if (net.transfer.size() != net.layer_sizes.size() - 1)
    throw ConfigError("need one transfer kind per non-input layer");
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    net.weights.emplace_back(net.layer_sizes[l + 1], net.layer_sizes[l]);
    net.biases.emplace_back(net.layer_sizes[l + 1], 0.0);
  }
  return net;
}

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
inline Network init_random(std::vector<std::size_t> layer_sizes, std::vector<TransferKind> transfer,
                           std::uint64_t seed) {
  Network net = make_network(std::move(layer_sizes), std::move(transfer));
  std::mt19937_64 rng(seed);
  for (Matrix& w : net.weights) {
    const double r = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> dist(-r, r);
    for (double& v : w.flat()) v = dist(rng);
  }
  return net;
}

// z[l] and a[l+1] belong to layer l+2; a[0] is the input.
struct ForwardTrace {
  std::vector<Vector> z;
  std::vector<Vector> a;
};

inline ForwardTrace forward(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_size()) throw DimensionError("network input", net.input_size(), x.size());
  ForwardTrace trace;
  const std::size_t pairs = net.weights.size();
  trace.z.reserve(pairs);
  trace.a.reserve(pairs + 1);
  trace.a.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < pairs; ++l) {
    const Matrix& w = net.weights[l];
    const Vector& prev = trace.a[l];
    Vector z(w.rows());
    Vector a(w.rows());
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double s = net.biases[l][i];
      const auto wi = w.row(i);
      for (std::size_t j = 0; j < w.cols(); ++j) s += wi[j] * prev[j];
      z[i] = s;
      a[i] = transfer(net.transfer[l], s);
    }
    trace.z.push_back(std::move(z));
    trace.a.push_back(std::move(a));
  }
  return trace;
}

inline std::span<const double> output_activations(const ForwardTrace& trace) { return trace.a.back(); }

// Convenience: forward pass returning only the output vector.
inline Vector predict(const Network& net, std::span<const double> x) {
  const ForwardTrace t = forward(net, x);
  return t.a.back();
}

}  // namespace senns

#endif  // SENNS_NETWORK_HPP
