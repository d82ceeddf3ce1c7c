// Copyright 2026 The agreerm Authors.
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

#ifndef AGREERM_SAMPLER_H_
#define AGREERM_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agreerm/agreement.h"

namespace agreerm {

enum class Strategy { kMax, kMin, kDist, kRand };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);

inline constexpr std::size_t kDefaultSampleSize = 2000;
inline constexpr std::size_t kDefaultTestSize = 1267;

struct SamplingSpec {
  Strategy strategy = Strategy::kRand;
  std::size_t n = kDefaultSampleSize;
  int bins = kDefaultAgreementBins;  // dist only
  std::uint64_t seed = 0;

  void validate() const;
};

struct DatasetSplit {
  std::vector<std::string> train_ids;  // corpus order
  std::vector<std::string> test_ids;   // sampled order
};

// Uniform held-out test set drawn without replacement; the remaining ids form
// the training pool.
DatasetSplit holdout_split(std::span<const std::string> ids, std::size_t test_n,
                           std::uint64_t seed);

// Top n by (agreement desc, repetitions desc, id asc).
std::vector<std::string> sample_max(std::span<const AgreementRecord> pool,
                                    std::size_t n);

// Top n by (agreement asc, repetitions desc, id asc).
std::vector<std::string> sample_min(std::span<const AgreementRecord> pool,
                                    std::size_t n);

// Equal quotas of ceil(n / bins) per agreement bin, each bin filled by
// (repetitions desc, id asc). Bins that run short hand their quota to the
// bins with the most items left, one item per bin per round. Output is
// grouped by bin, lowest agreement first, and always has exactly n ids. The
// seed is accepted for interface symmetry; the keys leave no random ties.
std::vector<std::string> sample_dist(std::span<const AgreementRecord> pool,
                                     std::size_t n, int bins, std::uint64_t seed);

// Uniform without replacement.
std::vector<std::string> sample_rand(std::span<const AgreementRecord> pool,
                                     std::size_t n, std::uint64_t seed);

std::vector<std::string> sample(std::span<const AgreementRecord> pool,
                                const SamplingSpec& spec);

}  // namespace agreerm

#endif  // AGREERM_SAMPLER_H_
