#ifndef SENNS_DATA_HPP
#define SENNS_DATA_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "senns/error.hpp"
#include "senns/io_util.hpp"
#include "senns/matrix.hpp"
#include "senns/network.hpp"

namespace senns {

using ClassId = std::size_t;

// Labelled input vectors. Labels are dense ids 0..N-1.
struct LabeledDataset {
  std::vector<Vector> inputs;
  std::vector<ClassId> labels;
  std::vector<std::string> class_names;  // optional, indexed by id

  std::size_t size() const { return inputs.size(); }
  std::size_t dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
  std::size_t num_classes() const {
    ClassId n = 0;
    for (ClassId c : labels) n = std::max(n, c + 1);
    return std::max<std::size_t>(n, class_names.size());
  }

  bool operator==(const LabeledDataset&) const = default;
};

// Throws DataError if the dataset is empty, ragged or non-finite.
inline void validate(const LabeledDataset& ds) {
  if (ds.inputs.empty()) throw DataError(DataError::Kind::Empty, "dataset is empty");
  if (ds.labels.size() != ds.inputs.size())
    throw DataError(DataError::Kind::CountMismatch, "dataset has " + std::to_string(ds.inputs.size()) +
                                                        " inputs but " + std::to_string(ds.labels.size()) + " labels");
  const std::size_t d = ds.dim();
  for (std::size_t t = 0; t < ds.size(); ++t) {
    if (ds.inputs[t].size() != d) throw DataError(DataError::Kind::RaggedRow, "example " + std::to_string(t) + " has the wrong dimension");
    if (!all_finite(ds.inputs[t])) throw DataError(DataError::Kind::NonNumeric, "example " + std::to_string(t) + " is not finite");
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    std::string_view field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool try_parse_double(std::string_view s, double& v) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v);
}

inline std::string csv_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace detail

 // Parses comma-separated rows. `label_column` is zero-based; negative values
 // count from the end (-1 is the last column). A first row whose feature
 // fields are not all numeric is taken as a header. Labels are arbitrary
 // tokens, densified to ids in first-appearance order.
inline LabeledDataset load_csv(std::istream& in, int label_column = -1) {
  LabeledDataset ds;
  std::map<std::string, ClassId, std::less<>> ids;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = detail::split_commas(line);
    if (fields.size() < 2)
      throw DataError(DataError::Kind::RaggedRow, "row needs at least one feature and a label", line_no);
    const long col = label_column < 0 ? static_cast<long>(fields.size()) + label_column : label_column;
    if (col < 0 || col >= static_cast<long>(fields.size()))
      throw DataError(DataError::Kind::RaggedRow, "label column out of range", line_no);

    Vector x;
    x.reserve(fields.size() - 1);
    bool numeric = true;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (static_cast<long>(i) == col) continue;
      double v = 0.0;
      if (!detail::try_parse_double(fields[i], v)) {
        numeric = false;
        bad = i;
        break;
      }
      x.push_back(v);
    }
    if (first_row) {
      first_row = false;
      width = fields.size();
      if (!numeric) continue;  // header
    }
    if (fields.size() != width)
      throw DataError(DataError::Kind::RaggedRow,
                      "row has " + std::to_string(fields.size()) + " columns, expected " + std::to_string(width), line_no);
    if (!numeric)
      throw DataError(DataError::Kind::NonNumeric,
                      "non-numeric feature '" + std::string(fields[bad]) + "' in column " + std::to_string(bad + 1),
                      line_no);
    const std::string label(fields[static_cast<std::size_t>(col)]);
    auto it = ids.find(label);
    if (it == ids.end()) {
      it = ids.emplace(label, ds.class_names.size()).first;
      ds.class_names.push_back(label);
    }
    ds.inputs.push_back(std::move(x));
    ds.labels.push_back(it->second);
  }
  if (ds.inputs.empty()) throw DataError(DataError::Kind::Empty, "CSV contains no data rows");
  return ds;
}

inline LabeledDataset load_csv(const std::filesystem::path& path, int label_column = -1) {
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::Io, "cannot open '" + path.string() + "'");
  return load_csv(in, label_column);
}

inline std::string label_name(const LabeledDataset& ds, ClassId c) {
  return c < ds.class_names.size() ? ds.class_names[c] : std::to_string(c);
}

// Features then label, one row per example, no header.
inline std::string to_csv(const LabeledDataset& ds) {
  std::string out;
  for (std::size_t t = 0; t < ds.size(); ++t) {
    for (double v : ds.inputs[t]) {
      out += detail::csv_number(v);
      out += ',';
    }
    out += label_name(ds, ds.labels[t]);
    out += '\n';
  }
  return out;
}

inline void export_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, to_csv(ds));
}

// ---------------------------------------------------------------------------
// IDX (MNIST container)

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

namespace detail {

inline std::uint32_t read_be32(const std::string& buf, std::size_t off) {
  return (std::uint32_t(std::uint8_t(buf[off])) << 24) | (std::uint32_t(std::uint8_t(buf[off + 1])) << 16) |
         (std::uint32_t(std::uint8_t(buf[off + 2])) << 8) | std::uint32_t(std::uint8_t(buf[off + 3]));
}

inline void append_be32(std::string& buf, std::uint32_t v) {
  buf.push_back(char((v >> 24) & 0xff));
  buf.push_back(char((v >> 16) & 0xff));
  buf.push_back(char((v >> 8) & 0xff));
  buf.push_back(char(v & 0xff));
}

}  // namespace detail

// Raw IDX contents before scaling; used by the writer and by tests.
struct IdxImages {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
  std::vector<std::uint8_t> labels;
};

inline IdxImages read_idx_raw(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const std::string img = read_file(images_path);
  const std::string lab = read_file(labels_path);
  if (img.size() < 16) throw DataError(DataError::Kind::Truncated, "IDX image header truncated");
  if (lab.size() < 8) throw DataError(DataError::Kind::Truncated, "IDX label header truncated");
  if (detail::read_be32(img, 0) != kIdxImagesMagic)
    throw DataError(DataError::Kind::BadMagic, "IDX image file has bad magic");
  if (detail::read_be32(lab, 0) != kIdxLabelsMagic)
    throw DataError(DataError::Kind::BadMagic, "IDX label file has bad magic");
  const std::size_t n_img = detail::read_be32(img, 4);
  const std::size_t n_lab = detail::read_be32(lab, 4);
  if (n_img != n_lab)
    throw DataError(DataError::Kind::CountMismatch,
                    "IDX files disagree on count: " + std::to_string(n_img) + " images, " + std::to_string(n_lab) + " labels");
  IdxImages raw;
  raw.rows = detail::read_be32(img, 8);
  raw.cols = detail::read_be32(img, 12);
  const std::size_t need = n_img * raw.rows * raw.cols;
  if (img.size() < 16 + need) throw DataError(DataError::Kind::Truncated, "IDX image data truncated");
  if (lab.size() < 8 + n_lab) throw DataError(DataError::Kind::Truncated, "IDX label data truncated");
  raw.pixels.assign(img.begin() + 16, img.begin() + 16 + static_cast<std::ptrdiff_t>(need));
  raw.labels.assign(lab.begin() + 8, lab.begin() + 8 + static_cast<std::ptrdiff_t>(n_lab));
  return raw;
}

inline void write_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                      const IdxImages& raw) {
  const std::size_t n = raw.labels.size();
  if (raw.pixels.size() != n * raw.rows * raw.cols)
    throw DataError(DataError::Kind::CountMismatch, "pixel buffer does not match label count");
  std::string img;
  detail::append_be32(img, kIdxImagesMagic);
  detail::append_be32(img, static_cast<std::uint32_t>(n));
  detail::append_be32(img, static_cast<std::uint32_t>(raw.rows));
  detail::append_be32(img, static_cast<std::uint32_t>(raw.cols));
  img.append(raw.pixels.begin(), raw.pixels.end());
  std::string lab;
  detail::append_be32(lab, kIdxLabelsMagic);
  detail::append_be32(lab, static_cast<std::uint32_t>(n));
  lab.append(raw.labels.begin(), raw.labels.end());
  write_file_atomic(images_path, img);
  write_file_atomic(labels_path, lab);
}

 // Loads the first `limit` examples (all of them if limit is 0 or too large).
 // Pixels are divided by 255. Class ids follow ascending raw label value and
 // class_names holds the raw value, so full MNIST maps digit d to id d.
inline LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                               std::size_t limit = 0) {
  const IdxImages raw = read_idx_raw(images_path, labels_path);
  std::size_t n = raw.labels.size();
  if (limit != 0) n = std::min(n, limit);
  if (n == 0) throw DataError(DataError::Kind::Empty, "IDX files contain no examples");
  const std::size_t d = raw.rows * raw.cols;

  std::vector<std::uint8_t> distinct(raw.labels.begin(), raw.labels.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  LabeledDataset ds;
  for (std::uint8_t v : distinct) ds.class_names.push_back(std::to_string(v));
  ds.inputs.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    Vector x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = raw.pixels[t * d + i] / 255.0;
    ds.inputs.push_back(std::move(x));
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), raw.labels[t]);
    ds.labels.push_back(static_cast<ClassId>(it - distinct.begin()));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

// Isotropic Gaussian blobs, `n_per_class` points around each center.
inline LabeledDataset make_gaussians(std::size_t n_per_class, const std::vector<Vector>& centers, double sigma,
                                     std::uint64_t seed) {
  if (n_per_class == 0 || centers.empty()) throw ConfigError("make_gaussians needs points and centers");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  LabeledDataset ds;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    ds.class_names.push_back(std::to_string(c));
    for (std::size_t i = 0; i < n_per_class; ++i) {
      Vector x = centers[c];
      for (double& v : x) v += sigma * noise(rng);
      ds.inputs.push_back(std::move(x));
      ds.labels.push_back(c);
    }
  }
  return ds;
}

// Two interleaved half circles with Gaussian jitter; n/2 points per class.
inline LabeledDataset make_two_moons(std::size_t n, double noise_sd, std::uint64_t seed) {
  if (n < 2) throw ConfigError("make_two_moons needs n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t n_upper = n / 2;
  const std::size_t n_lower = n - n_upper;
  LabeledDataset ds;
  ds.class_names = {"0", "1"};
  auto angle = [](std::size_t i, std::size_t count) {
    return count > 1 ? std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
  };
  for (std::size_t i = 0; i < n_upper; ++i) {
    const double th = angle(i, n_upper);
    ds.inputs.push_back({std::cos(th) + noise_sd * noise(rng), std::sin(th) + noise_sd * noise(rng)});
    ds.labels.push_back(0);
  }
  for (std::size_t i = 0; i < n_lower; ++i) {
    const double th = angle(i, n_lower);
    ds.inputs.push_back({1.0 - std::cos(th) + noise_sd * noise(rng), 0.5 - std::sin(th) + noise_sd * noise(rng)});
    ds.labels.push_back(1);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Preprocessing and feature export

struct Standardizer {
  Vector mean;
  Vector scale;  // 1/std, or 1 for constant features

  void apply(LabeledDataset& ds) const {
    for (Vector& x : ds.inputs)
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = (x[i] - mean[i]) * scale[i];
  }
};

// Per-feature mean 0 / std 1 statistics fitted on `ds`.
inline Standardizer fit_standardizer(const LabeledDataset& ds) {
  validate(ds);
  const std::size_t d = ds.dim();
  const double m = static_cast<double>(ds.size());
  Standardizer s{Vector(d, 0.0), Vector(d, 1.0)};
  for (const Vector& x : ds.inputs)
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += x[i] / m;
  Vector var(d, 0.0);
  for (const Vector& x : ds.inputs)
    for (std::size_t i = 0; i < d; ++i) var[i] += (x[i] - s.mean[i]) * (x[i] - s.mean[i]) / m;
  for (std::size_t i = 0; i < d; ++i)
    if (var[i] > 0.0) s.scale[i] = 1.0 / std::sqrt(var[i]);
  return s;
}

// Output-layer activations of every example, labels carried over.
inline LabeledDataset extract_features(const Network& net, const LabeledDataset& ds) {
  validate(ds);
  if (ds.dim() != net.input_size()) throw DimensionError("dataset dimension vs model input", net.input_size(), ds.dim());
  LabeledDataset out;
  out.labels = ds.labels;
  out.class_names = ds.class_names;
  out.inputs.reserve(ds.size());
  for (const Vector& x : ds.inputs) out.inputs.push_back(predict(net, x));
  return out;
}

inline void export_features(const Network& net, const LabeledDataset& ds, const std::filesystem::path& path) {
  export_csv(extract_features(net, ds), path);
}

}  // namespace senns

#endif  // SENNS_DATA_HPP
