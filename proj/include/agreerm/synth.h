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

#ifndef AGREERM_SYNTH_H_
#define AGREERM_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agreerm/corpus.h"

namespace agreerm {

// Latent summary quality used as ground truth for synthetic corpora.
struct QualityOracle {
  double keyword_weight = 3.0;
  double length_weight = 1.0;
  double repetition_weight = 2.0;
  int target_length = 20;  // tokens
  std::size_t keyword_count = 5;

  void validate() const;
};

struct OracleTerms {
  double keyword_coverage = 0.0;  // fraction of post keywords in the summary
  double length_fit = 0.0;        // exp(-|len - target| / target)
  double repeated_bigrams = 0.0;  // share of bigrams whose type repeats
};

OracleTerms oracle_terms(const QualityOracle& oracle, std::string_view post,
                         std::string_view summary);

// q = kw * coverage + len * length_fit - rep * repeated_bigrams.
double oracle_score(const QualityOracle& oracle, std::string_view post,
                    std::string_view summary);

// Bradley-Terry annotators: each of m votes picks a with probability
// logistic(beta * (q_a - q_b)).
struct AnnotatorModel {
  double beta = 2.0;
  int annotators_per_comparison = 22;

  void validate() const;
};

double logistic(double x);
double vote_probability(const AnnotatorModel& annotator, double q_a, double q_b);

struct SynthConfig {
  QualityOracle oracle;
  AnnotatorModel annotator;
  std::size_t n_posts = 1000;
  std::size_t candidates_per_post = 5;
  std::size_t min_sentences = 6;
  std::size_t max_sentences = 8;
  std::size_t reference_sentences = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  std::string comparison_id;
  double q_a = 0.0;
  double q_b = 0.0;
};

struct SyntheticCorpus {
  std::vector<Post> posts;
  std::vector<Comparison> comparisons;
  std::vector<ReferencePair> references;
  std::vector<GroundTruth> truth;  // parallel to comparisons
};

// Posts of keyword-bearing and filler sentences, candidate summaries built by
// perturbing extractive selections, every candidate pair of a post compared by
// m simulated annotators. Each post draws from its own RNG stream so the
// output does not depend on generation order.
SyntheticCorpus generate_corpus(const SynthConfig& config);

// SummEval-shaped records whose four ratings track oracle components,
// averaged over three noisy simulated experts.
std::vector<QualityAnnotatedSummary> generate_quality_annotations(
    const QualityOracle& oracle, std::size_t n_posts, std::size_t summaries_per_post,
    std::uint64_t seed);

void write_ground_truth(std::ostream& out, std::span<const GroundTruth> truth);
std::vector<GroundTruth> load_ground_truth(const std::string& path);

}  // namespace agreerm

#endif  // AGREERM_SYNTH_H_
