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

#include "agreerm/sampler.h"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "agreerm/error.h"
#include "agreerm/rng.h"

namespace agreerm {
namespace {

void check_pool(std::span<const AgreementRecord> pool, std::size_t n) {
  if (n < 1) throw Error("sample size must be at least 1");
  if (pool.size() < n) {
    throw Error("insufficient pool: need " + std::to_string(n) + " comparisons, have " +
                std::to_string(pool.size()));
  }
  std::unordered_set<std::string_view> ids;
  for (const AgreementRecord& r : pool) {
    if (!ids.insert(r.comparison_id).second) {
      throw Error("duplicate comparison id '" + r.comparison_id + "' in pool");
    }
  }
}

// Higher repetitions first, then id.
bool repetition_order(const AgreementRecord& l, const AgreementRecord& r) {
  if (l.repetitions != r.repetitions) return l.repetitions > r.repetitions;
  return l.comparison_id < r.comparison_id;
}

std::vector<std::string> take_sorted(std::span<const AgreementRecord> pool,
                                     std::size_t n, bool descending) {
  check_pool(pool, n);
  std::vector<const AgreementRecord*> order;
  order.reserve(pool.size());
  for (const AgreementRecord& r : pool) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [descending](const AgreementRecord* l, const AgreementRecord* r) {
              if (l->agreement != r->agreement) {
                return descending ? l->agreement > r->agreement
                                  : l->agreement < r->agreement;
              }
              return repetition_order(*l, *r);
            });
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(order[i]->comparison_id);
  return out;
}

}  // namespace

Strategy parse_strategy(std::string_view name) {
  if (name == "max") return Strategy::kMax;
  if (name == "min") return Strategy::kMin;
  if (name == "dist") return Strategy::kDist;
  if (name == "rand") return Strategy::kRand;
  throw Error("unknown sampling strategy '" + std::string(name) +
              "' (expected max, min, dist or rand)");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kMax: return "max";
    case Strategy::kMin: return "min";
    case Strategy::kDist: return "dist";
    case Strategy::kRand: return "rand";
  }
  return "?";
}

void SamplingSpec::validate() const {
  if (n < 1) throw Error("sampling spec: n must be at least 1");
  if (strategy == Strategy::kDist && bins < 2) {
    throw Error("sampling spec: dist needs at least 2 bins");
  }
}

DatasetSplit holdout_split(std::span<const std::string> ids, std::size_t test_n,
                           std::uint64_t seed) {
  if (test_n >= ids.size()) {
    throw Error("test split of " + std::to_string(test_n) +
                " leaves no training data in a corpus of " +
                std::to_string(ids.size()));
  }
  std::unordered_set<std::string_view> unique(ids.begin(), ids.end());
  if (unique.size() != ids.size()) throw Error("duplicate ids in corpus");

  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first test_n slots are the test sample.
  Rng rng(seed);
  for (std::size_t i = 0; i < test_n; ++i) {
    std::swap(order[i], order[i + rng.below(order.size() - i)]);
  }
  std::vector<bool> in_test(ids.size(), false);
  DatasetSplit split;
  split.test_ids.reserve(test_n);
  for (std::size_t i = 0; i < test_n; ++i) {
    in_test[order[i]] = true;
    split.test_ids.push_back(ids[order[i]]);
  }
  split.train_ids.reserve(ids.size() - test_n);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!in_test[i]) split.train_ids.push_back(ids[i]);
  }
  return split;
}

std::vector<std::string> sample_max(std::span<const AgreementRecord> pool,
                                    std::size_t n) {
  return take_sorted(pool, n, /*descending=*/true);
}

std::vector<std::string> sample_min(std::span<const AgreementRecord> pool,
                                    std::size_t n) {
  return take_sorted(pool, n, /*descending=*/false);
}

std::vector<std::string> sample_dist(std::span<const AgreementRecord> pool,
                                     std::size_t n, int bins, std::uint64_t /*seed*/) {
  check_pool(pool, n);
  if (bins < 2) throw Error("dist sampling needs at least 2 bins");

  std::vector<std::vector<const AgreementRecord*>> by_bin(bins);
  for (const AgreementRecord& r : pool) {
    by_bin[agreement_bin(r.agreement, bins)].push_back(&r);
  }
  for (auto& members : by_bin) {
    std::sort(members.begin(), members.end(),
              [](const AgreementRecord* l, const AgreementRecord* r) {
                return repetition_order(*l, *r);
              });
  }

  const std::size_t quota = (n + bins - 1) / bins;
  std::vector<std::size_t> take(bins);
  std::size_t taken = 0;
  for (int b = 0; b < bins; ++b) {
    take[b] = std::min(quota, by_bin[b].size());
    taken += take[b];
  }
  const auto remaining = [&](int b) { return by_bin[b].size() - take[b]; };

  // Ceiling quotas can overshoot n: trim one at a time from the largest
  // allotment, highest-agreement bin first among equals.
  while (taken > n) {
    int victim = bins - 1;
    for (int b = bins - 1; b >= 0; --b) {
      if (take[b] > take[victim]) victim = b;
    }
    --take[victim];
    --taken;
  }
  // Shortfall goes round-robin to the fullest remaining bins.
  while (taken < n) {
    std::vector<int> donors;
    for (int b = 0; b < bins; ++b) {
      if (remaining(b) > 0) donors.push_back(b);
    }
    std::stable_sort(donors.begin(), donors.end(),
                     [&](int l, int r) { return remaining(l) > remaining(r); });
    for (int b : donors) {
      if (taken == n) break;
      ++take[b];
      ++taken;
    }
  }

  std::vector<std::string> out;
  out.reserve(n);
  for (int b = 0; b < bins; ++b) {
    for (std::size_t i = 0; i < take[b]; ++i) out.push_back(by_bin[b][i]->comparison_id);
  }
  return out;
}

std::vector<std::string> sample_rand(std::span<const AgreementRecord> pool,
                                     std::size_t n, std::uint64_t seed) {
  check_pool(pool, n);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(order[i], order[i + rng.below(order.size() - i)]);
  }
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[order[i]].comparison_id);
  return out;
}

std::vector<std::string> sample(std::span<const AgreementRecord> pool,
                                const SamplingSpec& spec) {
  spec.validate();
  switch (spec.strategy) {
    case Strategy::kMax: return sample_max(pool, spec.n);
    case Strategy::kMin: return sample_min(pool, spec.n);
    case Strategy::kDist: return sample_dist(pool, spec.n, spec.bins, spec.seed);
    case Strategy::kRand: return sample_rand(pool, spec.n, spec.seed);
  }
  throw Error("unhandled strategy");
}

}  // namespace agreerm
