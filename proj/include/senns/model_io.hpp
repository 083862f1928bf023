#ifndef SENNS_MODEL_IO_HPP
#define SENNS_MODEL_IO_HPP

// Line-oriented text model format:
//
//   SENNS-MODEL v1
//   <layer sizes>
//   <transfer kind per non-input layer>
//   W 1
//   <s2 rows of s1 numbers>
//   b 1
//   <s2 numbers>
//   W 2
//   ...
//
// Numbers are written in shortest round-trip form, so parse(write(net)) is bit-exact.

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "senns/error.hpp"
#include "senns/network.hpp"

namespace senns {

inline constexpr std::string_view kModelMagic = "SENNS-MODEL v1";

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw FormatError("model line " + std::to_string(line_no) + ": bad number '" + std::string(tok) + "'");
  return v;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* expecting) {
    std::string line;
    if (!std::getline(in_, line))
      throw TruncatedError("model stream ended early, expecting " + std::string(expecting) + " at line " +
                           std::to_string(line_no_ + 1));
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

inline Vector parse_row(LineReader& reader, std::size_t expected, const char* what) {
  const std::string line = reader.next(what);
  const auto toks = split_ws(line);
  if (toks.size() != expected)
    throw ShapeError("model line " + std::to_string(reader.line_no()) + ": " + what + " has " +
                     std::to_string(toks.size()) + " values, expected " + std::to_string(expected));
  Vector row(expected);
  for (std::size_t i = 0; i < expected; ++i) row[i] = parse_double(toks[i], reader.line_no());
  return row;
}

inline void expect_tag(LineReader& reader, char tag, std::size_t layer) {
  const std::string line = reader.next(tag == 'W' ? "weight header" : "bias header");
  const auto toks = split_ws(line);
  const std::string want = std::to_string(layer);
  if (toks.size() != 2 || toks[0] != std::string_view(&tag, 1) || toks[1] != want)
    throw ShapeError("model line " + std::to_string(reader.line_no()) + ": expected '" + std::string(1, tag) +
                     " " + want + "', got '" + line + "'");
}

}  // namespace detail

inline void write_model(std::ostream& out, const Network& net) {
  validate(net);
  out << kModelMagic << '\n';
  for (std::size_t i = 0; i < net.layer_sizes.size(); ++i) out << (i ? " " : "") << net.layer_sizes[i];
  out << '\n';
  for (std::size_t i = 0; i < net.transfer.size(); ++i) out << (i ? " " : "") << to_string(net.transfer[i]);
  out << '\n';
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Matrix& w = net.weights[l];
    out << "W " << l + 1 << '\n';
    for (std::size_t i = 0; i < w.rows(); ++i) {
      for (std::size_t j = 0; j < w.cols(); ++j) out << (j ? " " : "") << detail::format_double(w(i, j));
      out << '\n';
    }
    out << "b " << l + 1 << '\n';
    for (std::size_t i = 0; i < net.biases[l].size(); ++i)
      out << (i ? " " : "") << detail::format_double(net.biases[l][i]);
    out << '\n';
  }
}

inline Network read_model(std::istream& in) {
  detail::LineReader reader(in);
  const std::string magic = reader.next("header");
  if (magic != kModelMagic) throw VersionError("not a '" + std::string(kModelMagic) + "' stream: '" + magic + "'");

  std::vector<std::size_t> sizes;
  const std::string size_line = reader.next("layer sizes");
  for (auto tok : detail::split_ws(size_line)) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0)
      throw ShapeError("model line 2: bad layer size '" + std::string(tok) + "'");
    sizes.push_back(v);
  }
  if (sizes.size() < 2) throw ShapeError("model line 2: need at least 2 layer sizes");

  std::vector<TransferKind> kinds;
  const std::string kind_line = reader.next("transfer kinds");
  for (auto tok : detail::split_ws(kind_line)) {
    try {
      kinds.push_back(parse_transfer(tok));
    } catch (const ConfigError& e) {
      throw FormatError(std::string("model line 3: ") + e.what());
    }
  }
  if (kinds.size() != sizes.size() - 1)
    throw ShapeError("model line 3: " + std::to_string(kinds.size()) + " transfer kinds for " +
                     std::to_string(sizes.size() - 1) + " non-input layers");

  Network net = make_network(sizes, kinds);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    detail::expect_tag(reader, 'W', l + 1);
    Matrix& w = net.weights[l];
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const Vector row = detail::parse_row(reader, w.cols(), "weight row");
      std::copy(row.begin(), row.end(), w.row(i).begin());
    }
    detail::expect_tag(reader, 'b', l + 1);
    net.biases[l] = detail::parse_row(reader, sizes[l + 1], "bias row");
  }
  if (!all_finite_parameters(net)) throw FormatError("model contains non-finite parameters");
  return net;
}

inline std::string serialize(const Network& net) {
  std::ostringstream out;
  write_model(out, net);
  return out.str();
}

inline Network deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_model(in);
}

}  // namespace senns

#endif  // SENNS_MODEL_IO_HPP
