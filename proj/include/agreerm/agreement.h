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

#ifndef AGREERM_AGREEMENT_H_
#define AGREERM_AGREEMENT_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agreerm/corpus.h"

namespace agreerm {

// Modal fraction max(a, b) / (a + b), in [0.5, 1].
double comparison_agreement(int votes_a, int votes_b);

// Probability that two distinct annotators, drawn without replacement,
// picked the same side: [C(a,2) + C(b,2)] / C(a+b,2).
double pairwise_agreement(int votes_a, int votes_b);

struct AgreementRecord {
  std::string comparison_id;
  double agreement = 1.0;
  int repetitions = 0;
  std::optional<double> pairwise_agreement;  // set when repetitions >= 2
};

AgreementRecord agreement_record(const Comparison& comparison);
std::vector<AgreementRecord> agreement_records(
    std::span<const Comparison> comparisons);

inline constexpr int kDefaultAgreementBins = 10;

// Index of the right-closed bin over [0.5, 1.0] holding `agreement`; 0.5
// falls in the first bin.
int agreement_bin(double agreement, int bins);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

struct CorpusStatistics {
  std::size_t records = 0;
  double mean_agreement = 0.0;
  std::optional<double> mean_pairwise_agreement;
  std::size_t pairwise_defined = 0;
  std::vector<HistogramBin> agreement_histogram;
  std::map<int, std::size_t> repetition_histogram;
};

CorpusStatistics corpus_statistics(std::span<const AgreementRecord> records,
                                   int bins = kDefaultAgreementBins);

enum class ModalOutcome { kA, kB, kTie };

struct ModalResult {
  ModalOutcome outcome = ModalOutcome::kTie;
  // Probability that a majority of k annotators, resampled with replacement
  // from the observed vote split, lands on the modal side (0.5 for a tie).
  double majority_probability = 0.5;
};

ModalResult modal_aggregate(int votes_a, int votes_b, int k);

}  // namespace agreerm

#endif  // AGREERM_AGREEMENT_H_
