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

#ifndef DIAL_NUMERIC_HPP_
#define DIAL_NUMERIC_HPP_

#include <span>
#include <vector>

namespace dial {

// Percentile with linear interpolation between order statistics (the
// common "linear" convention). q in [0, 100].
double percentile(std::span<const double> values, double q);

// softmax(lambda * scores) with max-subtraction.
std::vector<double> softmax(std::span<const double> scores, double lambda);

// Composite trapezoid rule on a (possibly non-uniform) grid.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace dial

#endif  // DIAL_NUMERIC_HPP_
