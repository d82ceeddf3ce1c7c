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

#include "agreerm/agreement.h"

#include <algorithm>
#include <cmath>

#include "agreerm/error.h"

namespace agreerm {
namespace {

void check_votes(int votes_a, int votes_b) {
  if (votes_a < 0 || votes_b < 0) throw Error("vote counts must be non-negative");
}

double choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

double comparison_agreement(int votes_a, int votes_b) {
  check_votes(votes_a, votes_b);
  const int total = votes_a + votes_b;
  if (total < 1) throw Error("agreement undefined for a comparison with zero votes");
  return static_cast<double>(std::max(votes_a, votes_b)) / total;
}

double pairwise_agreement(int votes_a, int votes_b) {
  check_votes(votes_a, votes_b);
  const int total = votes_a + votes_b;
  if (total < 2) throw Error("pairwise agreement needs at least two votes");
  return (choose2(votes_a) + choose2(votes_b)) / choose2(total);
}

AgreementRecord agreement_record(const Comparison& c) {
  AgreementRecord r;
  r.comparison_id = c.id;
  r.agreement = comparison_agreement(c.votes_a, c.votes_b);
  r.repetitions = c.repetitions();
  if (r.repetitions >= 2) r.pairwise_agreement = pairwise_agreement(c.votes_a, c.votes_b);
  return r;
}

std::vector<AgreementRecord> agreement_records(
    std::span<const Comparison> comparisons) {
  std::vector<AgreementRecord> out;
  out.reserve(comparisons.size());
  for (const Comparison& c : comparisons) out.push_back(agreement_record(c));
  return out;
}

int agreement_bin(double agreement, int bins) {
  if (bins < 1) throw Error("bin count must be positive");
  const double width = 0.5 / bins;
  // Tolerance keeps exact edges such as 0.6 with width 0.05 in the lower bin.
  const double x = (agreement - 0.5) / width;
  const int idx = static_cast<int>(std::ceil(x - 1e-9)) - 1;
  return std::clamp(idx, 0, bins - 1);
}

CorpusStatistics corpus_statistics(std::span<const AgreementRecord> records,
                                   int bins) {
  if (records.empty()) throw Error("corpus statistics need at least one record");
  if (bins < 1) throw Error("bin count must be positive");
  CorpusStatistics s;
  s.records = records.size();
  s.agreement_histogram.resize(bins);
  for (int i = 0; i < bins; ++i) {
    s.agreement_histogram[i].lower = 0.5 + 0.5 * i / bins;
    s.agreement_histogram[i].upper = 0.5 + 0.5 * (i + 1) / bins;
  }
  double sum = 0.0;
  double pair_sum = 0.0;
  for (const AgreementRecord& r : records) {
    sum += r.agreement;
    ++s.agreement_histogram[agreement_bin(r.agreement, bins)].count;
    ++s.repetition_histogram[r.repetitions];
    if (r.pairwise_agreement) {
      pair_sum += *r.pairwise_agreement;
      ++s.pairwise_defined;
    }
  }
  s.mean_agreement = sum / static_cast<double>(records.size());
  if (s.pairwise_defined > 0) {
    s.mean_pairwise_agreement = pair_sum / static_cast<double>(s.pairwise_defined);
  }
  return s;
}

ModalResult modal_aggregate(int votes_a, int votes_b, int k) {
  check_votes(votes_a, votes_b);
  if (k < 1 || k % 2 == 0) throw Error("modal aggregation needs an odd annotator count");
  const int total = votes_a + votes_b;
  if (total < 1) throw Error("modal aggregation needs at least one vote");
  if (votes_a == votes_b) return {ModalOutcome::kTie, 0.5};

  const double p = static_cast<double>(std::max(votes_a, votes_b)) / total;
  double prob = 0.0;
  double binom = 1.0;  // C(k, j), built incrementally
  for (int j = 0; j <= k; ++j) {
    if (j > 0) binom = binom * (k - j + 1) / j;
    if (2 * j > k) prob += binom * std::pow(p, j) * std::pow(1.0 - p, k - j);
  }
  return {votes_a > votes_b ? ModalOutcome::kA : ModalOutcome::kB, prob};
}

}  // namespace agreerm
