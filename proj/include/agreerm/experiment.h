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

#ifndef AGREERM_EXPERIMENT_H_
#define AGREERM_EXPERIMENT_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "agreerm/corpus.h"
#include "agreerm/eval.h"
#include "agreerm/reward.h"
#include "agreerm/rlhf.h"
#include "agreerm/sampler.h"
#include "json.hpp"

namespace agreerm {

// Declarative description of the full matrix. JSON schema (all keys
// optional unless noted):
//
//   comparisons        path, required
//   format             "canonical" | "tldr-openai"
//   posts              path; needed when the comparison file has no posts
//   references         path; enables ROUGE in the RLHF curve
//   quality            path; enables the correlation stage
//   output_dir         path, required
//   seed               integer, required; default for every nested seed
//   test_n             held-out comparisons (1267)
//   strategies         [{"strategy": "max", "n": 2000, "bins": 10, "seed": s}]
//   reward             TrainConfig fields
//   featurizer         FeaturizerConfig fields
//   ppo                PPOConfig fields
//   rlhf               {"k": 2, "documents": 50, "length_penalty": 0,
//                       "target_length": 20, "keyword_count": 5}
//   parallel           run lanes on worker threads
struct ExperimentConfig {
  std::string comparisons_path;
  ComparisonFormat format = ComparisonFormat::kCanonical;
  std::string posts_path;
  std::string references_path;
  std::string quality_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::size_t test_n = kDefaultTestSize;
  std::vector<SamplingSpec> strategies;
  TrainConfig reward;
  FeaturizerConfig featurizer;
  PPOConfig ppo;
  std::size_t rlhf_k = 2;
  std::size_t rlhf_documents = 50;
  double length_penalty = 0.0;
  int target_length = 20;
  std::size_t keyword_count = 5;
  bool parallel = false;

  // Checks values, distinct strategies and that every referenced path exists.
  void validate() const;
  nlohmann::json to_json() const;
  // Seeds missing from nested objects inherit the global seed.
  static ExperimentConfig from_json(const nlohmann::json& j);
  // Reads a config file; `overrides` is merge-patched over it first. Relative
  // paths resolve against the config file's directory.
  static ExperimentConfig load(const std::string& path,
                               const nlohmann::json& overrides = nlohmann::json::object());

  // Fingerprint of the canonical JSON form, output_dir excluded.
  std::string hash() const;
};

struct Provenance {
  std::string config_hash;
  std::string corpus_hash;
  std::uint64_t seed = 0;

  // "config_hash=...,corpus_hash=...,seed=...,tool_version=..."
  std::string line() const;
  nlohmann::json to_json() const;
};

// One row of a correlation table: Kendall tau-b per quality dimension, NaN
// where a level or dimension is undefined.
struct CorrelationRow {
  std::string scorer;
  std::string level;  // "summary" or "system"
  std::array<double, 4> tau{};
};

// Summary- and system-level rows for one scorer.
std::vector<CorrelationRow> correlation_rows(const std::string& name, const SummaryScorer& scorer,
                                             std::span<const QualityAnnotatedSummary> quality);
// ROUGE-1/2/L of each summary against its annotated reference; empty when
// some record has no reference.
std::vector<CorrelationRow> rouge_baseline_rows(std::span<const QualityAnnotatedSummary> quality);
void write_correlation_csv(std::ostream& out, const Provenance& provenance,
                           std::span<const CorrelationRow> rows);

struct LaneReport {
  Strategy strategy = Strategy::kRand;
  bool ok = false;
  std::string error;
  double final_accuracy = 0.0;
  std::vector<std::string> files;  // relative to output_dir
};

struct MatrixReport {
  Provenance provenance;
  std::vector<LaneReport> lanes;
  std::vector<std::string> files;  // combined outputs, relative to output_dir

  bool ok() const;
};

// Per lane: sample, train the reward model with held-out accuracy, correlate
// with quality ratings, run RLHF. Lane artifacts go to output_dir/<strategy>/
// and combined CSVs to output_dir. A lane that throws records its error in
// <strategy>/error.txt and the others still run.
MatrixReport run_matrix(const ExperimentConfig& config);

// Writes manifest lines: a provenance object, then one object per sampled
// comparison with its agreement and repetitions.
// `extra` fields are added to the provenance object.
void write_manifest(std::ostream& out, const Provenance& provenance,
                    std::span<const std::string> ids, std::span<const AgreementRecord> pool,
                    const nlohmann::json& extra = nlohmann::json::object());
std::vector<std::string> read_manifest(const std::string& path);

}  // namespace agreerm

#endif  // AGREERM_EXPERIMENT_H_
