// Copyright 2026 The DiAL Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dial/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "dial/error.hpp"

namespace dial {

int Dataset::num_clusters() const {
  if (cluster_ids.empty()) return 0;
  return *std::max_element(cluster_ids.begin(), cluster_ids.end()) + 1;
}

void validate(const Dataset& dataset) {
  if (dataset.size() < 1 || dataset.dim() < 1) {
    throw StructuralError("dataset must have n >= 1 rows and d >= 1 columns");
  }
  if (!dataset.features.allFinite()) {
    throw DomainError("dataset '" + dataset.name + "' contains non-finite features");
  }
  if (dataset.has_labels()) {
    if (static_cast<int>(dataset.labels.size()) != dataset.size()) {
      throw StructuralError("label count " + std::to_string(dataset.labels.size()) +
                            " does not match row count " + std::to_string(dataset.size()));
    }
    for (int y : dataset.labels) {
      if (y < 0 || y >= dataset.num_classes) {
        throw DomainError("label " + std::to_string(y) + " outside [0, " +
                          std::to_string(dataset.num_classes) + ")");
      }
    }
  }
  if (dataset.has_clusters()) {
    if (dataset.cluster_ids.size() != static_cast<std::size_t>(dataset.size()) ||
        (dataset.has_labels() && dataset.cluster_ids.size() != dataset.labels.size())) {
      throw StructuralError("cluster id count does not match label count");
    }
    for (int c : dataset.cluster_ids) {
      if (c < 0) throw DomainError("negative cluster id");
    }
  }
}

namespace {

struct Field {
  std::string_view text;
  std::size_t offset;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, long& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<Field> split_fields(std::string_view line, std::size_t line_offset) {
  std::vector<Field> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back({line.substr(start, i - start), line_offset + start});
      start = i + 1;
    }
  }
  return fields;
}

std::vector<unsigned char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t at) {
  if (at + 4 > bytes.size()) throw ParseError("truncated idx header", at);
  return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
         (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
}

}  // namespace

Dataset parse_csv(const std::string& text, std::optional<int> label_column) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::vector<std::size_t> label_offsets;
  std::size_t width = 0;
  bool first_content_line = true;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    const std::size_t line_offset = pos;
    pos = end + 1;
    if (trim(line).empty()) continue;

    auto fields = split_fields(line, line_offset);
    const int ncols = static_cast<int>(fields.size());
    int label_idx = -1;
    if (label_column) {
      label_idx = *label_column < 0 ? ncols + *label_column : *label_column;
      if (label_idx < 0 || label_idx >= ncols) {
        throw ParseError("label column out of range", line_offset);
      }
    }

    std::vector<double> values;
    values.reserve(fields.size());
    bool numeric = true;
    std::size_t bad_offset = 0;
    for (int c = 0; c < ncols; ++c) {
      if (c == label_idx) continue;
      double v = 0;
      if (!parse_double(fields[c].text, v)) {
        numeric = false;
        bad_offset = fields[c].offset;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (first_content_line) {
        first_content_line = false;  // header row
        continue;
      }
      throw ParseError("non-numeric feature value", bad_offset);
    }
    first_content_line = false;
    if (width == 0) {
      width = values.size();
    } else if (values.size() != width) {
      throw ParseError("row has " + std::to_string(values.size()) + " features, expected " +
                           std::to_string(width),
                       line_offset);
    }
    rows.push_back(std::move(values));
    if (label_idx >= 0) {
      raw_labels.emplace_back(trim(fields[label_idx].text));
      label_offsets.push_back(fields[label_idx].offset);
    }
  }

  if (rows.empty()) throw ParseError("no data rows", text.size());

  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) ds.features(i, j) = rows[i][j];
  }

  if (!raw_labels.empty()) {
    // Non-negative integer labels are used verbatim; anything else is mapped
    // to ids by sorted order of the distinct strings.
    bool all_int = true;
    std::vector<long> ints(raw_labels.size());
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
      if (!parse_int(raw_labels[i], ints[i]) || ints[i] < 0) {
        all_int = false;
        break;
      }
    }
    ds.labels.resize(raw_labels.size());
    if (all_int) {
      long max_label = 0;
      for (std::size_t i = 0; i < ints.size(); ++i) {
        ds.labels[i] = static_cast<int>(ints[i]);
        max_label = std::max(max_label, ints[i]);
      }
      ds.num_classes = static_cast<int>(max_label) + 1;
    } else {
      std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
      std::map<std::string, int> ids;
      for (const auto& s : distinct) ids.emplace(s, static_cast<int>(ids.size()));
      for (std::size_t i = 0; i < raw_labels.size(); ++i) ds.labels[i] = ids.at(raw_labels[i]);
      ds.num_classes = static_cast<int>(ids.size());
    }
  }
  validate(ds);
  return ds;
}

RowMatrix parse_idx_images(const std::vector<unsigned char>& bytes) {
  const std::uint32_t magic = read_be32(bytes, 0);
  if ((magic >> 8) != 0x08) throw ParseError("idx image file must hold unsigned bytes", 2);
  const int ndims = static_cast<int>(magic & 0xFF);
  if (ndims < 1) throw ParseError("idx image file needs at least one dimension", 3);
  std::size_t count = read_be32(bytes, 4);
  std::size_t row = 1;
  for (int k = 1; k < ndims; ++k) row *= read_be32(bytes, 4 + 4 * static_cast<std::size_t>(k));
  const std::size_t header = 4 + 4 * static_cast<std::size_t>(ndims);
  if (bytes.size() < header + count * row) {
    throw ParseError("idx payload shorter than declared dimensions", bytes.size());
  }
  RowMatrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(row));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < row; ++j) out(i, j) = bytes[header + i * row + j] / 255.0;
  }
  return out;
}

std::vector<int> parse_idx_labels(const std::vector<unsigned char>& bytes) {
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != 0x00000801) throw ParseError("expected idx label magic 0x00000801", 0);
  const std::size_t count = read_be32(bytes, 4);
  if (bytes.size() < 8 + count) throw ParseError("idx label payload truncated", bytes.size());
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

Dataset load_dataset(const DatasetSource& source) {
  Dataset ds;
  if (source.format == DatasetFormat::kCsv) {
    std::ifstream in(source.path, std::ios::binary);
    if (!in) throw StructuralError("cannot open '" + source.path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    ds = parse_csv(buffer.str(), source.label_column);
  } else {
    ds.features = parse_idx_images(read_bytes(source.path));
    if (!source.labels_path.empty()) {
      ds.labels = parse_idx_labels(read_bytes(source.labels_path));
      if (ds.labels.size() != static_cast<std::size_t>(ds.features.rows())) {
        throw StructuralError("idx label count " + std::to_string(ds.labels.size()) +
                              " does not match image count " +
                              std::to_string(ds.features.rows()));
      }
      ds.num_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    }
    validate(ds);
  }
  ds.name = source.path;
  if (source.limit && *source.limit < ds.size()) {
    ds = stratified_subsample(ds, *source.limit, source.seed);
  }
  return ds;
}

Dataset stratified_subsample(const Dataset& dataset, int total, std::uint64_t seed) {
  const int n = dataset.size();
  if (total < 1 || total > n) throw DomainError("subsample size must lie in [1, n]");
  std::mt19937_64 rng(seed);
  std::vector<int> keep;

  if (!dataset.has_labels()) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    keep.assign(all.begin(), all.begin() + total);
  } else {
    const int K = dataset.num_classes;
    std::vector<std::vector<int>> members(K);
    for (int i = 0; i < n; ++i) members[dataset.labels[i]].push_back(i);

    // Largest-remainder allocation of `total` across classes.
    std::vector<int> quota(K);
    std::vector<std::pair<double, int>> remainders;
    int assigned = 0;
    for (int k = 0; k < K; ++k) {
      const double exact = static_cast<double>(total) * members[k].size() / n;
      quota[k] = static_cast<int>(std::floor(exact));
      assigned += quota[k];
      remainders.emplace_back(-(exact - quota[k]), k);
    }
    std::sort(remainders.begin(), remainders.end());
    for (int r = 0; assigned < total; ++r, ++assigned) ++quota[remainders[r].second];

    for (int k = 0; k < K; ++k) {
      auto& m = members[k];
      std::shuffle(m.begin(), m.end(), rng);
      keep.insert(keep.end(), m.begin(), m.begin() + quota[k]);
    }
  }
  std::sort(keep.begin(), keep.end());

  Dataset out;
  out.name = dataset.name;
  out.num_classes = dataset.num_classes;
  out.features.resize(static_cast<Eigen::Index>(keep.size()), dataset.features.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = dataset.features.row(keep[i]);
    if (dataset.has_labels()) out.labels.push_back(dataset.labels[keep[i]]);
    if (dataset.has_clusters()) out.cluster_ids.push_back(dataset.cluster_ids[keep[i]]);
  }
  return out;
}

Dataset generate_mixture(const std::vector<MixtureComponent>& components, int n,
                         std::uint64_t seed) {
  if (components.empty()) throw DomainError("mixture needs at least one component");
  if (n < 1) throw DomainError("mixture sample size must be positive");
  const std::size_t d = components.front().mean.size();
  if (d == 0) throw DomainError("mixture components need a non-empty mean");
  std::vector<double> weights;
  int K = 0;
  for (const auto& c : components) {
    if (!(c.weight > 0)) throw DomainError("mixture weights must be positive");
    if (c.mean.size() != d || c.variance.size() != d) {
      throw DomainError("mixture component dimensions are inconsistent");
    }
    for (double v : c.variance) {
      if (!(v > 0)) throw DomainError("mixture covariance entries must be positive");
    }
    if (c.class_id < 0) throw DomainError("negative class id");
    weights.push_back(c.weight);
    K = std::max(K, c.class_id + 1);
  }

  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);

  Dataset ds;
  ds.name = "mixture";
  ds.num_classes = K;
  ds.features.resize(n, static_cast<Eigen::Index>(d));
  ds.labels.resize(n);
  ds.cluster_ids.resize(n);
  for (int i = 0; i < n; ++i) {
    const int c = pick(rng);
    const auto& comp = components[c];
    for (std::size_t j = 0; j < d; ++j) {
      ds.features(i, static_cast<Eigen::Index>(j)) =
          comp.mean[j] + std::sqrt(comp.variance[j]) * normal(rng);
    }
    ds.cluster_ids[i] = c;
    ds.labels[i] = comp.class_id;
  }
  return ds;
}

Dataset generate_two_moons(int n, double noise, std::uint64_t seed) {
  if (n < 2) throw DomainError("two moons needs n >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, noise > 0 ? noise : 1.0);
  Dataset ds;
  ds.name = "two_moons";
  ds.num_classes = 2;
  ds.features.resize(n, 2);
  ds.labels.resize(n);
  ds.cluster_ids.resize(n);
  for (int i = 0; i < n; ++i) {
    const int moon = i < n / 2 ? 0 : 1;
    const double t = angle(rng);
    double x = moon == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double y = moon == 0 ? std::sin(t) : 0.5 - std::sin(t);
    if (noise > 0) {
      x += jitter(rng);
      y += jitter(rng);
    }
    ds.features(i, 0) = x;
    ds.features(i, 1) = y;
    ds.labels[i] = moon;
    ds.cluster_ids[i] = moon;
  }
  return ds;
}

std::vector<MixtureComponent> ring_of_blobs(int count, double radius, double spread) {
  std::vector<MixtureComponent> out;
  for (int c = 0; c < count; ++c) {
    const double a = 2.0 * std::numbers::pi * c / count;
    out.push_back({1.0, {radius * std::cos(a), radius * std::sin(a)},
                   {spread * spread, spread * spread}, c});
  }
  return out;
}

}  // namespace dial
