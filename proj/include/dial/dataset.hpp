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

#ifndef DIAL_DATASET_HPP_
#define DIAL_DATASET_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dial {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Feature matrix with optional ground truth. `labels` and `cluster_ids` are
// empty when absent.
struct Dataset {
  RowMatrix features;
  std::vector<int> labels;
  std::vector<int> cluster_ids;
  int num_classes = 0;
  std::string name;

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  bool has_labels() const { return !labels.empty(); }
  bool has_clusters() const { return !cluster_ids.empty(); }
  int num_clusters() const;
};

// Throws StructuralError / DomainError when an invariant is broken.
void validate(const Dataset& dataset);

enum class DatasetFormat { kCsv, kIdx };

struct DatasetSource {
  std::string path;
  // Only used for kIdx; empty means "images only".
  std::string labels_path;
  DatasetFormat format = DatasetFormat::kCsv;
  // Column holding the label in CSV input; negative counts from the end,
  // so -1 is the last column. std::nullopt means "no label column".
  std::optional<int> label_column = -1;
  std::optional<int> limit;
  std::uint64_t seed = 0;
};

Dataset load_dataset(const DatasetSource& source);

// Parsers over in-memory buffers; load_dataset reads the file and forwards.
Dataset parse_csv(const std::string& text, std::optional<int> label_column);
RowMatrix parse_idx_images(const std::vector<unsigned char>& bytes);
std::vector<int> parse_idx_labels(const std::vector<unsigned char>& bytes);

// Keeps `total` points, allocated across classes in proportion to class size
// (largest remainder), each class sampled uniformly without replacement.
// Unlabeled datasets are subsampled uniformly. Selected rows keep their
// original relative order.
Dataset stratified_subsample(const Dataset& dataset, int total, std::uint64_t seed);

struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> variance;  // diagonal of the covariance
  int class_id = 0;
};

// i.i.d. draws from a diagonal Gaussian mixture. The component index becomes
// the cluster id and the component's class id the label.
Dataset generate_mixture(const std::vector<MixtureComponent>& components, int n,
                         std::uint64_t seed);

// Two interleaved half circles with Gaussian noise; cluster id == class.
Dataset generate_two_moons(int n, double noise, std::uint64_t seed);

// `count` components with means spread on a circle of the given radius and
// isotropic standard deviation `spread`. Class of component c is c.
std::vector<MixtureComponent> ring_of_blobs(int count, double radius, double spread);

}  // namespace dial

#endif  // DIAL_DATASET_HPP_
