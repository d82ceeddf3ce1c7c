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

#ifndef AGREERM_RLHF_H_
#define AGREERM_RLHF_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "agreerm/corpus.h"
#include "agreerm/eval.h"
#include "json.hpp"

namespace agreerm {

struct Document {
  std::string post_id;
  std::string context;
  std::vector<std::string> sentences;
  std::vector<std::vector<std::string>> sentence_tokens;
  std::vector<std::string> keywords;
};

Document make_document(const Post& post, std::size_t keyword_count = 5);

// Episode: pick k distinct sentences one at a time; the summary is the picks
// joined in selection order. Reward is scorer(context, summary) minus
// length_penalty per summary token.
class ExtractiveEnv {
 public:
  static constexpr std::size_t kFeatureCount = 7;

  ExtractiveEnv(std::vector<Document> documents, std::size_t k, SummaryScorer reward,
                double length_penalty = 0.0, int target_length = 20);

  std::size_t k() const { return k_; }
  std::size_t feature_count() const { return kFeatureCount; }
  std::span<const Document> documents() const { return documents_; }

  std::string assemble(std::size_t doc, std::span<const std::size_t> selection) const;
  double reward(std::size_t doc, std::span<const std::size_t> selection) const;

  // Legal actions (unselected sentences) and their feature rows, row-major
  // with feature_count() columns: relative position, is-first, length / 10,
  // keyword coverage, novel keyword coverage, bigram overlap with the
  // selection, and fit of the running length to the target.
  void action_features(std::size_t doc, std::span<const std::size_t> selected,
                       std::vector<std::size_t>& legal, std::vector<double>& features) const;

 private:
  std::vector<Document> documents_;
  std::size_t k_;
  SummaryScorer reward_;
  double length_penalty_;
  int target_length_;
};

// Linear softmax policy over legal actions, with the snapshot it is
// regularized against.
class Policy {
 public:
  explicit Policy(std::size_t feature_count = ExtractiveEnv::kFeatureCount);
  explicit Policy(std::vector<double> parameters);
  Policy(std::vector<double> parameters, std::vector<double> reference);

  std::span<const double> parameters() const { return params_; }
  std::span<const double> reference() const { return reference_; }
  std::size_t feature_count() const { return params_.size(); }

  // log pi(. | state) for `rows` actions with the given parameters.
  static void log_probabilities(std::span<const double> params, std::span<const double> features,
                                std::size_t rows, std::vector<double>& out);

 private:
  std::vector<double> params_;
  std::vector<double> reference_;
};

struct PPOConfig {
  double clip_epsilon = 0.2;
  double kl_coef = 0.1;
  double kl_target = 0.02;
  double learning_rate = 0.5;
  std::size_t updates = 200;
  std::size_t rollouts_per_update = 64;
  std::size_t epochs_per_update = 4;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static PPOConfig from_json(const nlohmann::json& j);
};

struct TrajectoryStep {
  std::vector<double> features;  // rows x feature_count
  std::size_t actions = 0;       // rows
  std::size_t action = 0;        // index into the legal rows
  double old_log_prob = 0.0;
};

struct Episode {
  std::size_t document = 0;
  std::vector<std::size_t> selection;  // sentence indices
  std::vector<TrajectoryStep> steps;
  double reward = 0.0;
  double advantage = 0.0;
};

struct TrajectoryBatch {
  std::vector<Episode> episodes;

  double mean_reward() const;
  std::size_t step_count() const;
  // advantage = reward - baseline, then standardized across the batch when it
  // holds at least two episodes.
  void set_advantages(double baseline);
};

TrajectoryBatch rollout(const Policy& policy, const ExtractiveEnv& env, std::size_t n_episodes,
                        std::uint64_t seed);

struct SurrogateValue {
  double surrogate = 0.0;  // mean clipped surrogate over steps
  double kl = 0.0;         // mean KL(current || reference) over steps
  double objective = 0.0;  // surrogate - kl_coef * kl
  std::vector<double> surrogate_grad;
  std::vector<double> kl_grad;
  std::vector<double> objective_grad;
  double max_ratio_deviation = 0.0;  // max |rho - 1|
};

// Clipped surrogate min(rho A, clip(rho, 1 - eps, 1 + eps) A) with a KL
// penalty. The surrogate gradient flows through rho only where the
// unclipped branch is strictly selected or rho lies strictly inside the
// clip range.
SurrogateValue evaluate_surrogate(std::span<const double> params,
                                  std::span<const double> reference,
                                  const TrajectoryBatch& batch, const PPOConfig& config);

struct PpoDiagnostics {
  double surrogate = 0.0;
  double kl = 0.0;
  double grad_norm = 0.0;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
};

struct PpoResult {
  Policy policy;
  PpoDiagnostics diagnostics;
};

// Gradient ascent on the surrogate for epochs_per_update passes. Each step
// is halved until every likelihood ratio stays within [1 - eps, 1 + eps];
// a step that would push KL to the pre-update policy above 2 * kl_target is
// rejected and the update stops early. The returned policy's reference is
// the pre-update parameters.
PpoResult ppo_update(const Policy& policy, const TrajectoryBatch& batch, const PPOConfig& config);

struct RlhfPoint {
  std::size_t update = 0;
  double mean_reward = 0.0;  // greedy decoding, averaged over documents
  double rouge1_f1 = 0.0;
  double rouge2_f1 = 0.0;
  double rougeL_f1 = 0.0;
  double rollout_reward = 0.0;  // mean sampled reward of the batch (NaN at 0)
  double kl = 0.0;
};

struct RlhfResult {
  Policy policy;
  std::vector<RlhfPoint> curve;
};

// Greedy selection (highest logit, lowest index on ties).
std::vector<std::size_t> greedy_selection(const Policy& policy, const ExtractiveEnv& env,
                                          std::size_t doc);

// Evaluation point for the current policy; ROUGE is averaged over documents
// that have a reference and is NaN when none do.
RlhfPoint evaluate_policy(const Policy& policy, const ExtractiveEnv& env,
                          std::span<const ReferencePair> references);

RlhfResult train_rlhf(const Policy& policy, const ExtractiveEnv& env, const PPOConfig& config,
                      std::span<const ReferencePair> references = {});

// Exhaustive search over all ordered selections of k sentences.
double optimal_reward(const ExtractiveEnv& env, std::size_t doc);

void write_rlhf_curve(std::ostream& out, std::span<const RlhfPoint> curve);

}  // namespace agreerm

#endif  // AGREERM_RLHF_H_
