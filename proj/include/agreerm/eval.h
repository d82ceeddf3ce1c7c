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

#ifndef AGREERM_EVAL_H_
#define AGREERM_EVAL_H_

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agreerm/corpus.h"

namespace agreerm {

class RewardModel;

// Kendall tau-b, (C - D) / sqrt((n0 - n1)(n0 - n2)), computed in O(n log n).
// Throws on length mismatch, fewer than two items, or a fully tied input.
double kendall_tau_b(std::span<const double> xs, std::span<const double> ys);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Clipped n-gram overlap on lowercased alphanumeric tokens. No stemming and
// no stopword removal.
RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n);
RougeScore rouge_n(std::span<const std::string> candidate,
                   std::span<const std::string> reference, int n);

// LCS-based ROUGE-L over the same tokens.
RougeScore rouge_l(std::string_view candidate, std::string_view reference);
RougeScore rouge_l(std::span<const std::string> candidate,
                   std::span<const std::string> reference);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

enum class QualityDimension { kCoherence = 0, kConsistency, kFluency, kRelevance };
inline constexpr std::array<QualityDimension, 4> kQualityDimensions = {
    QualityDimension::kCoherence, QualityDimension::kConsistency,
    QualityDimension::kFluency, QualityDimension::kRelevance};

std::string_view to_string(QualityDimension dim);
double rating(const QualityAnnotatedSummary& s, QualityDimension dim);

struct DimensionCorrelation {
  std::optional<double> tau;
  std::string error;  // set when tau is empty
};

struct CorrelationReport {
  std::array<DimensionCorrelation, 4> dimensions;
  std::size_t n = 0;

  const DimensionCorrelation& operator[](QualityDimension d) const {
    return dimensions[static_cast<std::size_t>(d)];
  }
  bool ok() const;
};

using SummaryScorer =
    std::function<double(std::string_view source, std::string_view summary)>;

SummaryScorer scorer_for(const RewardModel& model);

enum class CorrelationLevel { kSummary, kSystem };

// Tau-b between scorer output and each expert rating. At system level the
// scores and ratings are first averaged per system_id. A failing dimension
// records its error and leaves the others intact.
CorrelationReport correlate_with_quality(const SummaryScorer& scorer,
                                         std::span<const QualityAnnotatedSummary> summaries,
                                         CorrelationLevel level = CorrelationLevel::kSummary);

}  // namespace agreerm

#endif  // AGREERM_EVAL_H_
