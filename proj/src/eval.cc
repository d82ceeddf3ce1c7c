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

#include "agreerm/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>

#include "agreerm/error.h"
#include "agreerm/reward.h"
#include "agreerm/text.h"

namespace agreerm {
namespace {

std::int64_t tie_pairs(std::int64_t run) { return run * (run - 1) / 2; }

// Merge sort counting strict inversions; equal keys are not inversions.
std::int64_t count_inversions(std::vector<double>& a, std::vector<double>& buf,
                              std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(a, buf, lo, mid) + count_inversions(a, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[j] < a[i]) {
      inv += static_cast<std::int64_t>(mid - i);
      buf[k++] = a[j++];
    } else {
      buf[k++] = a[i++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, a.begin() + lo);
  return inv;
}

std::map<std::string, std::size_t> ngram_counts(std::span<const std::string> tokens, int n) {
  std::map<std::string, std::size_t> counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int t = 1; t < n; ++t) {
      key.push_back('\x1f');
      key += tokens[i + t];
    }
    ++counts[key];
  }
  return counts;
}

RougeScore make_score(double overlap, double candidate_total, double reference_total) {
  RougeScore s;
  s.precision = candidate_total > 0 ? overlap / candidate_total : 0.0;
  s.recall = reference_total > 0 ? overlap / reference_total : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                    : 0.0;
  return s;
}

}  // namespace

double kendall_tau_b(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error("kendall: sequences differ in length");
  const std::size_t n = xs.size();
  if (n < 2) throw Error("kendall: need at least two observations");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(xs[i]) || std::isnan(ys[i])) throw Error("kendall: NaN input");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (xs[l] != xs[r]) return xs[l] < xs[r];
    return ys[l] < ys[r];
  });

  std::int64_t x_ties = 0, joint_ties = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && xs[order[j]] == xs[order[i]]) ++j;
    x_ties += tie_pairs(static_cast<std::int64_t>(j - i));
    for (std::size_t a = i; a < j;) {
      std::size_t b = a;
      while (b < j && ys[order[b]] == ys[order[a]]) ++b;
      joint_ties += tie_pairs(static_cast<std::int64_t>(b - a));
      a = b;
    }
    i = j;
  }

  std::vector<double> y_sorted(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) y_sorted[i] = ys[order[i]];
  const std::int64_t swaps = count_inversions(y_sorted, buf, 0, n);

  std::int64_t y_ties = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && y_sorted[j] == y_sorted[i]) ++j;
    y_ties += tie_pairs(static_cast<std::int64_t>(j - i));
    i = j;
  }

  const std::int64_t n0 = tie_pairs(static_cast<std::int64_t>(n));
  if (n0 == x_ties || n0 == y_ties) throw Error("kendall: all-tied sequence");
  const std::int64_t concordant_minus_discordant = n0 - x_ties - y_ties + joint_ties - 2 * swaps;
  return static_cast<double>(concordant_minus_discordant) /
         std::sqrt(static_cast<double>(n0 - x_ties) * static_cast<double>(n0 - y_ties));
}

RougeScore rouge_n(std::span<const std::string> candidate,
                   std::span<const std::string> reference, int n) {
  if (n < 1) throw Error("rouge-n: n must be positive");
  if (reference.empty()) throw Error("rouge: empty reference");
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  double overlap = 0.0, cand_total = 0.0, ref_total = 0.0;
  for (const auto& [gram, count] : ref) {
    ref_total += static_cast<double>(count);
    if (const auto it = cand.find(gram); it != cand.end()) {
      overlap += static_cast<double>(std::min(count, it->second));
    }
  }
  for (const auto& kv : cand) cand_total += static_cast<double>(kv.second);
  return make_score(overlap, cand_total, ref_total);
}

RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n) {
  return rouge_n(tokenize(candidate), tokenize(reference), n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(std::span<const std::string> candidate,
                   std::span<const std::string> reference) {
  if (reference.empty()) throw Error("rouge: empty reference");
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  return make_score(lcs, static_cast<double>(candidate.size()),
                    static_cast<double>(reference.size()));
}

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  return rouge_l(tokenize(candidate), tokenize(reference));
}

std::string_view to_string(QualityDimension dim) {
  switch (dim) {
    case QualityDimension::kCoherence: return "coherence";
    case QualityDimension::kConsistency: return "consistency";
    case QualityDimension::kFluency: return "fluency";
    case QualityDimension::kRelevance: return "relevance";
  }
  return "?";
}

double rating(const QualityAnnotatedSummary& s, QualityDimension dim) {
  switch (dim) {
    case QualityDimension::kCoherence: return s.coherence;
    case QualityDimension::kConsistency: return s.consistency;
    case QualityDimension::kFluency: return s.fluency;
    case QualityDimension::kRelevance: return s.relevance;
  }
  return 0.0;
}

bool CorrelationReport::ok() const {
  return std::all_of(dimensions.begin(), dimensions.end(),
                     [](const DimensionCorrelation& d) { return d.tau.has_value(); });
}

SummaryScorer scorer_for(const RewardModel& model) {
  return [&model](std::string_view source, std::string_view summary) {
    return model.score(source, summary);
  };
}

CorrelationReport correlate_with_quality(const SummaryScorer& scorer,
                                         std::span<const QualityAnnotatedSummary> summaries,
                                         CorrelationLevel level) {
  if (summaries.size() < 2) throw Error("correlation needs at least two annotated summaries");
  std::vector<double> scores;
  std::array<std::vector<double>, 4> ratings;
  if (level == CorrelationLevel::kSummary) {
    for (const QualityAnnotatedSummary& s : summaries) {
      scores.push_back(scorer(s.source_text, s.summary));
      for (QualityDimension d : kQualityDimensions) {
        ratings[static_cast<std::size_t>(d)].push_back(rating(s, d));
      }
    }
  } else {
    struct Sums {
      double score = 0.0;
      std::array<double, 4> ratings{};
      std::size_t count = 0;
    };
    std::map<std::string, Sums> systems;
    for (const QualityAnnotatedSummary& s : summaries) {
      Sums& sums = systems[s.system_id];
      sums.score += scorer(s.source_text, s.summary);
      for (QualityDimension d : kQualityDimensions) {
        sums.ratings[static_cast<std::size_t>(d)] += rating(s, d);
      }
      ++sums.count;
    }
    if (systems.size() < 2) throw Error("system-level correlation needs at least two systems");
    for (const auto& [id, sums] : systems) {
      const double c = static_cast<double>(sums.count);
      scores.push_back(sums.score / c);
      for (std::size_t d = 0; d < 4; ++d) ratings[d].push_back(sums.ratings[d] / c);
    }
  }

  CorrelationReport report;
  report.n = scores.size();
  for (QualityDimension d : kQualityDimensions) {
    const std::size_t i = static_cast<std::size_t>(d);
    try {
      report.dimensions[i].tau = kendall_tau_b(scores, ratings[i]);
    } catch (const Error& e) {
      report.dimensions[i].error = std::string(to_string(d)) + ": " + e.what();
    }
  }
  return report;
}

}  // namespace agreerm
