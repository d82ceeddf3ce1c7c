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

#ifndef AGREERM_REWARD_H_
#define AGREERM_REWARD_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agreerm/corpus.h"
#include "json.hpp"

namespace agreerm {

struct FeaturizerConfig {
  std::vector<int> ngram_orders = {1, 2};
  std::uint32_t dimension = 1u << 18;  // power of two, >= 2^10
  std::uint64_t hash_seed = 0;
  bool context_conditioning = false;

  void validate() const;
  nlohmann::json to_json() const;
  static FeaturizerConfig from_json(const nlohmann::json& j);
};

// Sorted, duplicate-free sparse vector.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  double mass() const;
  std::size_t size() const { return indices.size(); }
};

// Hashed n-gram counts of the summary, plus distinct (context unigram,
// summary unigram) pairs when context conditioning is on.
SparseVector featurize(const FeaturizerConfig& config, std::string_view context,
                       std::string_view summary);

// r(x, y) = theta . phi(x, y) for the linear model. With hidden units h the
// model is r = w2 . tanh(W1 phi), and the flat parameter vector stores W1
// feature-major (W1[i * h + j]) followed by w2.
class RewardModel {
 public:
  explicit RewardModel(FeaturizerConfig featurizer, std::size_t hidden_units = 0);
  RewardModel(FeaturizerConfig featurizer, std::vector<double> parameters,
              std::size_t hidden_units = 0);

  // Zero output weights, small random first layer (MLP only).
  static RewardModel initial(FeaturizerConfig featurizer, std::size_t hidden_units,
                             std::uint64_t seed);

  double score(std::string_view context, std::string_view summary) const;
  double score(const SparseVector& features) const;

  // grad += scale * d score / d params
  void accumulate_score_gradient(const SparseVector& features, double scale,
                                 std::span<double> grad) const;

  const FeaturizerConfig& featurizer() const { return featurizer_; }
  std::size_t hidden_units() const { return hidden_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  nlohmann::json train_meta = nlohmann::json::object();

 private:
  friend class RewardTrainer;
  FeaturizerConfig featurizer_;
  std::size_t hidden_ = 0;
  std::vector<double> params_;
};

struct PreferenceExample {
  std::string post_id;
  std::string winner_text;
  std::string loser_text;
  double weight = 1.0;
};

// One example per vote: votes_a examples with a winning and votes_b with b
// winning, weight 1 each.
std::vector<PreferenceExample> expand_to_examples(std::span<const Comparison> comparisons);

// Pairs per prompt in the ranking loss normalizer 1 / C(K, 2). Only pairwise
// data exists, so the normalizer is 1.
inline constexpr int kComparisonsPerPrompt = 2;

// Weighted mean of -log sigmoid(r_w - r_l), plus (l2 / 2) * |theta|^2.
double pairwise_loss(const RewardModel& model, std::span<const PreferenceExample> batch,
                     const ContextIndex& contexts, double l2_penalty = 0.0);

// Dense gradient of pairwise_loss with respect to the flat parameters.
std::vector<double> gradient(const RewardModel& model,
                             std::span<const PreferenceExample> batch,
                             const ContextIndex& contexts, double l2_penalty = 0.0);

// -log sigmoid(x), stable for large |x|.
double neg_log_sigmoid(double x);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 3;
  std::size_t batch_size = 32;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;
  std::size_t eval_every = 250;  // steps
  std::size_t hidden_units = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct CurvePoint {
  std::size_t step = 0;
  double train_loss = 0.0;     // mean over batches since the previous point
  double test_accuracy = 0.0;  // NaN when no evaluation set was given
};

struct AccuracyResult {
  double accuracy = 0.0;
  std::size_t decidable = 0;
  std::size_t vote_ties = 0;  // excluded comparisons
};

// Fraction of comparisons with a strict vote majority where the majority
// side scores higher; score ties count 0.5.
AccuracyResult accuracy(const RewardModel& model, std::span<const Comparison> test,
                        const ContextIndex& contexts);

struct TrainResult {
  RewardModel model;
  std::vector<CurvePoint> curve;
};

// Mini-batch gradient descent with a fixed learning rate and L2 penalty.
// The shuffle order comes from config.seed, so equal inputs give bit-equal
// parameters. When eval_set is non-null the curve also tracks its accuracy.
TrainResult train(std::span<const PreferenceExample> examples, const TrainConfig& config,
                  const FeaturizerConfig& featurizer, const ContextIndex& contexts,
                  std::span<const Comparison> eval_set = {});

// Checkpoint: "AGRMCKPT", u32 version, u32 header length, JSON header, then
// the parameters as little-endian IEEE-754 doubles.
void save_model(const std::string& path, const RewardModel& model);
RewardModel load_model(const std::string& path);

void write_learning_curve(std::ostream& out, std::span<const CurvePoint> curve);

}  // namespace agreerm

#endif  // AGREERM_REWARD_H_
