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

#include "agreerm/rlhf.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "agreerm/error.h"
#include "agreerm/rng.h"
#include "agreerm/text.h"

namespace agreerm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void logits(std::span<const double> params, std::span<const double> features, std::size_t rows,
            std::vector<double>& out) {
  const std::size_t f = params.size();
  out.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double z = 0.0;
    for (std::size_t c = 0; c < f; ++c) z += params[c] * features[r * f + c];
    out[r] = z;
  }
}

std::unordered_set<std::string> bigram_set(const std::vector<std::string>& tokens) {
  std::unordered_set<std::string> out;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) out.insert(tokens[i] + '\x1f' + tokens[i + 1]);
  return out;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Document make_document(const Post& post, std::size_t keyword_count) {
  Document d;
  d.post_id = post.id;
  d.context = context_text(post);
  d.sentences = split_sentences(post.body);
  for (const std::string& s : d.sentences) d.sentence_tokens.push_back(tokenize(s));
  d.keywords = extract_keywords(tokenize(post.body), keyword_count);
  return d;
}

ExtractiveEnv::ExtractiveEnv(std::vector<Document> documents, std::size_t k,
                             SummaryScorer reward, double length_penalty, int target_length)
    : documents_(std::move(documents)),
      k_(k),
      reward_(std::move(reward)),
      length_penalty_(length_penalty),
      target_length_(target_length) {
  if (documents_.empty()) throw Error("extractive environment needs at least one document");
  if (k_ < 1) throw Error("extractive environment needs k >= 1");
  if (!(length_penalty_ >= 0.0)) throw Error("length penalty must be >= 0");
  if (target_length_ < 1) throw Error("target length must be positive");
  if (!reward_) throw Error("extractive environment needs a reward function");
  for (const Document& d : documents_) {
    if (d.sentences.size() < k_) {
      throw Error("document '" + d.post_id + "' has " + std::to_string(d.sentences.size()) +
                  " sentences, fewer than k = " + std::to_string(k_));
    }
  }
}

std::string ExtractiveEnv::assemble(std::size_t doc, std::span<const std::size_t> selection) const {
  const Document& d = documents_.at(doc);
  std::string out;
  for (std::size_t i = 0; i < selection.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += d.sentences.at(selection[i]);
  }
  return out;
}

double ExtractiveEnv::reward(std::size_t doc, std::span<const std::size_t> selection) const {
  const Document& d = documents_.at(doc);
  std::size_t tokens = 0;
  for (std::size_t s : selection) tokens += d.sentence_tokens.at(s).size();
  return reward_(d.context, assemble(doc, selection)) -
         length_penalty_ * static_cast<double>(tokens);
}

void ExtractiveEnv::action_features(std::size_t doc, std::span<const std::size_t> selected,
                                    std::vector<std::size_t>& legal,
                                    std::vector<double>& features) const {
  const Document& d = documents_.at(doc);
  const std::size_t s_count = d.sentences.size();
  std::vector<bool> taken(s_count, false);
  std::unordered_set<std::string_view> covered;
  std::unordered_set<std::string> selected_bigrams;
  std::size_t selected_len = 0;
  for (std::size_t s : selected) {
    taken.at(s) = true;
    for (const std::string& t : d.sentence_tokens[s]) covered.insert(t);
    for (auto& b : bigram_set(d.sentence_tokens[s])) selected_bigrams.insert(b);
    selected_len += d.sentence_tokens[s].size();
  }
  const double n_kw = static_cast<double>(d.keywords.size());
  const double target = target_length_;

  legal.clear();
  features.clear();
  for (std::size_t i = 0; i < s_count; ++i) {
    if (taken[i]) continue;
    legal.push_back(i);
    const auto& toks = d.sentence_tokens[i];
    const std::unordered_set<std::string_view> present(toks.begin(), toks.end());
    std::size_t kw = 0, novel = 0;
    for (const std::string& k : d.keywords) {
      if (present.count(k)) {
        ++kw;
        if (!covered.count(k)) ++novel;
      }
    }
    const auto bigrams = bigram_set(toks);
    std::size_t overlap = 0;
    for (const auto& b : bigrams) overlap += selected_bigrams.count(b);

    features.push_back(s_count > 1 ? static_cast<double>(i) / (s_count - 1) : 0.0);
    features.push_back(i == 0 ? 1.0 : 0.0);
    features.push_back(static_cast<double>(toks.size()) / 10.0);
    features.push_back(n_kw > 0 ? kw / n_kw : 0.0);
    features.push_back(n_kw > 0 ? novel / n_kw : 0.0);
    features.push_back(bigrams.empty() ? 0.0 : static_cast<double>(overlap) / bigrams.size());
    features.push_back(
        std::exp(-std::abs(static_cast<double>(selected_len + toks.size()) - target) / target));
  }
}

Policy::Policy(std::size_t feature_count)
    : params_(feature_count, 0.0), reference_(feature_count, 0.0) {}

Policy::Policy(std::vector<double> parameters)
    : params_(std::move(parameters)), reference_(params_) {}

Policy::Policy(std::vector<double> parameters, std::vector<double> reference)
    : params_(std::move(parameters)), reference_(std::move(reference)) {
  if (params_.size() != reference_.size()) throw Error("policy reference size mismatch");
}

void Policy::log_probabilities(std::span<const double> params, std::span<const double> features,
                               std::size_t rows, std::vector<double>& out) {
  logits(params, features, rows, out);
  const double top = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double z : out) sum += std::exp(z - top);
  const double log_norm = top + std::log(sum);
  for (double& z : out) z -= log_norm;
}

void PPOConfig::validate() const {
  if (!(clip_epsilon >= 0.0 && clip_epsilon <= 1.0)) throw Error("clip epsilon must lie in [0, 1]");
  if (!(kl_coef >= 0.0)) throw Error("kl coefficient must be >= 0");
  if (!(kl_target > 0.0)) throw Error("kl target must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error("policy learning rate must be finite and >= 0");
  }
  if (rollouts_per_update < 1) throw Error("rollouts per update must be positive");
  if (epochs_per_update < 1) throw Error("epochs per update must be positive");
}

nlohmann::json PPOConfig::to_json() const {
  return {{"clip_epsilon", clip_epsilon},
          {"kl_coef", kl_coef},
          {"kl_target", kl_target},
          {"learning_rate", learning_rate},
          {"updates", updates},
          {"rollouts_per_update", rollouts_per_update},
          {"epochs_per_update", epochs_per_update},
          {"seed", seed}};
}

PPOConfig PPOConfig::from_json(const nlohmann::json& j) {
  PPOConfig c;
  c.clip_epsilon = j.value("clip_epsilon", c.clip_epsilon);
  c.kl_coef = j.value("kl_coef", c.kl_coef);
  c.kl_target = j.value("kl_target", c.kl_target);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.updates = j.value("updates", c.updates);
  c.rollouts_per_update = j.value("rollouts_per_update", c.rollouts_per_update);
  c.epochs_per_update = j.value("epochs_per_update", c.epochs_per_update);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

double TrajectoryBatch::mean_reward() const {
  if (episodes.empty()) return kNaN;
  double s = 0.0;
  for (const Episode& e : episodes) s += e.reward;
  return s / static_cast<double>(episodes.size());
}

std::size_t TrajectoryBatch::step_count() const {
  std::size_t n = 0;
  for (const Episode& e : episodes) n += e.steps.size();
  return n;
}

void TrajectoryBatch::set_advantages(double baseline) {
  for (Episode& e : episodes) e.advantage = e.reward - baseline;
  if (episodes.size() < 2) return;
  double mean = 0.0;
  for (const Episode& e : episodes) mean += e.advantage;
  mean /= static_cast<double>(episodes.size());
  double var = 0.0;
  for (const Episode& e : episodes) var += (e.advantage - mean) * (e.advantage - mean);
  const double sd = std::sqrt(var / static_cast<double>(episodes.size()));
  for (Episode& e : episodes) e.advantage = sd > 1e-12 ? (e.advantage - mean) / sd : 0.0;
}

TrajectoryBatch rollout(const Policy& policy, const ExtractiveEnv& env, std::size_t n_episodes,
                        std::uint64_t seed) {
  if (policy.feature_count() != env.feature_count()) {
    throw Error("policy feature count does not match the environment");
  }
  TrajectoryBatch batch;
  batch.episodes.resize(n_episodes);
  std::vector<std::size_t> legal;
  std::vector<double> logp;
  for (std::size_t e = 0; e < n_episodes; ++e) {
    Rng rng = Rng::stream(seed, e);
    Episode& ep = batch.episodes[e];
    ep.document = rng.below(env.documents().size());
    for (std::size_t t = 0; t < env.k(); ++t) {
      TrajectoryStep step;
      env.action_features(ep.document, ep.selection, legal, step.features);
      step.actions = legal.size();
      Policy::log_probabilities(policy.parameters(), step.features, step.actions, logp);
      const double u = rng.uniform();
      double cum = 0.0;
      step.action = step.actions - 1;
      for (std::size_t a = 0; a < step.actions; ++a) {
        cum += std::exp(logp[a]);
        if (u < cum) {
          step.action = a;
          break;
        }
      }
      step.old_log_prob = logp[step.action];
      ep.selection.push_back(legal[step.action]);
      ep.steps.push_back(std::move(step));
    }
    ep.reward = env.reward(ep.document, ep.selection);
  }
  return batch;
}

SurrogateValue evaluate_surrogate(std::span<const double> params,
                                  std::span<const double> reference,
                                  const TrajectoryBatch& batch, const PPOConfig& config) {
  const std::size_t f = params.size();
  if (reference.size() != f) throw Error("reference parameter size mismatch");
  SurrogateValue out;
  out.surrogate_grad.assign(f, 0.0);
  out.kl_grad.assign(f, 0.0);
  const double eps = config.clip_epsilon;
  std::vector<double> logp, ref_logp;
  std::size_t steps = 0;
  for (const Episode& ep : batch.episodes) {
    for (const TrajectoryStep& st : ep.steps) {
      ++steps;
      Policy::log_probabilities(params, st.features, st.actions, logp);
      Policy::log_probabilities(reference, st.features, st.actions, ref_logp);

      // E_pi[f] for the score-function gradient.
      std::vector<double> mean_f(f, 0.0);
      for (std::size_t r = 0; r < st.actions; ++r) {
        const double p = std::exp(logp[r]);
        for (std::size_t c = 0; c < f; ++c) mean_f[c] += p * st.features[r * f + c];
      }

      const double ratio = std::exp(logp[st.action] - st.old_log_prob);
      const double adv = ep.advantage;
      const double clipped_ratio = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
      const double unclipped = ratio * adv;
      const double clipped = clipped_ratio * adv;
      out.surrogate += std::min(unclipped, clipped);
      out.max_ratio_deviation = std::max(out.max_ratio_deviation, std::abs(ratio - 1.0));
      const bool inside = ratio > 1.0 - eps && ratio < 1.0 + eps;
      if (inside || unclipped < clipped) {
        for (std::size_t c = 0; c < f; ++c) {
          out.surrogate_grad[c] +=
              adv * ratio * (st.features[st.action * f + c] - mean_f[c]);
        }
      }

      double kl = 0.0;
      for (std::size_t r = 0; r < st.actions; ++r) kl += std::exp(logp[r]) * (logp[r] - ref_logp[r]);
      out.kl += kl;
      for (std::size_t r = 0; r < st.actions; ++r) {
        const double dz = std::exp(logp[r]) * (logp[r] - ref_logp[r] - kl);
        for (std::size_t c = 0; c < f; ++c) out.kl_grad[c] += dz * st.features[r * f + c];
      }
    }
  }
  if (steps == 0) throw Error("surrogate needs a non-empty batch");
  const double inv = 1.0 / static_cast<double>(steps);
  out.surrogate *= inv;
  out.kl *= inv;
  out.objective = out.surrogate - config.kl_coef * out.kl;
  out.objective_grad.resize(f);
  for (std::size_t c = 0; c < f; ++c) {
    out.surrogate_grad[c] *= inv;
    out.kl_grad[c] *= inv;
    out.objective_grad[c] = out.surrogate_grad[c] - config.kl_coef * out.kl_grad[c];
  }
  return out;
}

PpoResult ppo_update(const Policy& policy, const TrajectoryBatch& batch, const PPOConfig& config) {
  config.validate();
  if (batch.step_count() == 0) throw Error("ppo update needs a non-empty batch");
  const std::vector<double> start(policy.parameters().begin(), policy.parameters().end());
  std::vector<double> params = start;
  PpoDiagnostics diag;

  SurrogateValue current = evaluate_surrogate(params, start, batch, config);
  diag.grad_norm = norm2(current.objective_grad);
  for (std::size_t epoch = 0; epoch < config.epochs_per_update; ++epoch) {
    if (!std::isfinite(current.objective)) throw Error("non-finite policy surrogate");
    std::vector<double> step(params.size());
    for (std::size_t c = 0; c < params.size(); ++c) {
      step[c] = config.learning_rate * current.objective_grad[c];
    }
    if (norm2(step) == 0.0) break;

    bool accepted = false;
    std::vector<double> candidate(params.size());
    SurrogateValue next;
    for (int halvings = 0; halvings < 40; ++halvings) {
      for (std::size_t c = 0; c < params.size(); ++c) candidate[c] = params[c] + step[c];
      next = evaluate_surrogate(candidate, start, batch, config);
      if (next.max_ratio_deviation <= config.clip_epsilon) {
        accepted = true;
        break;
      }
      for (double& s : step) s *= 0.5;
    }
    if (!accepted) break;
    if (next.kl > 2.0 * config.kl_target) {
      diag.early_stopped = true;
      break;
    }
    params = candidate;
    current = std::move(next);
    ++diag.epochs_run;
  }
  diag.surrogate = current.surrogate;
  diag.kl = current.kl;
  return {Policy(std::move(params), start), diag};
}

std::vector<std::size_t> greedy_selection(const Policy& policy, const ExtractiveEnv& env,
                                          std::size_t doc) {
  std::vector<std::size_t> selection, legal;
  std::vector<double> features, z;
  for (std::size_t t = 0; t < env.k(); ++t) {
    env.action_features(doc, selection, legal, features);
    logits(policy.parameters(), features, legal.size(), z);
    const auto best = std::max_element(z.begin(), z.end());
    selection.push_back(legal[static_cast<std::size_t>(best - z.begin())]);
  }
  return selection;
}

RlhfPoint evaluate_policy(const Policy& policy, const ExtractiveEnv& env,
                          std::span<const ReferencePair> references) {
  std::unordered_map<std::string, const std::string*> refs;
  for (const ReferencePair& r : references) refs.emplace(r.post_id, &r.reference_summary);
  RlhfPoint point;
  double reward = 0.0, r1 = 0.0, r2 = 0.0, rl = 0.0;
  std::size_t with_ref = 0;
  const auto docs = env.documents();
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const std::vector<std::size_t> sel = greedy_selection(policy, env, d);
    reward += env.reward(d, sel);
    if (const auto it = refs.find(docs[d].post_id); it != refs.end()) {
      const std::vector<std::string> cand = tokenize(env.assemble(d, sel));
      const std::vector<std::string> ref = tokenize(*it->second);
      r1 += rouge_n(cand, ref, 1).f1;
      r2 += rouge_n(cand, ref, 2).f1;
      rl += rouge_l(cand, ref).f1;
      ++with_ref;
    }
  }
  point.mean_reward = reward / static_cast<double>(docs.size());
  point.rouge1_f1 = with_ref ? r1 / with_ref : kNaN;
  point.rouge2_f1 = with_ref ? r2 / with_ref : kNaN;
  point.rougeL_f1 = with_ref ? rl / with_ref : kNaN;
  point.rollout_reward = kNaN;
  return point;
}

RlhfResult train_rlhf(const Policy& policy, const ExtractiveEnv& env, const PPOConfig& config,
                      std::span<const ReferencePair> references) {
  config.validate();
  RlhfResult result{policy, {}};
  result.curve.push_back(evaluate_policy(policy, env, references));

  double baseline_sum = 0.0;
  std::size_t baseline_count = 0;
  for (std::size_t u = 1; u <= config.updates; ++u) {
    TrajectoryBatch batch =
        rollout(result.policy, env, config.rollouts_per_update, mix64(config.seed) ^ mix64(u));
    const double batch_mean = batch.mean_reward();
    batch.set_advantages(baseline_count > 0 ? baseline_sum / baseline_count : batch_mean);
    for (const Episode& e : batch.episodes) baseline_sum += e.reward;
    baseline_count += batch.episodes.size();

    PpoResult step = ppo_update(result.policy, batch, config);
    result.policy = std::move(step.policy);
    RlhfPoint point = evaluate_policy(result.policy, env, references);
    point.update = u;
    point.rollout_reward = batch_mean;
    point.kl = step.diagnostics.kl;
    result.curve.push_back(point);
  }
  return result;
}

double optimal_reward(const ExtractiveEnv& env, std::size_t doc) {
  const std::size_t s_count = env.documents()[doc].sentences.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> selection;
  std::vector<bool> used(s_count, false);
  const auto search = [&](auto&& self) -> void {
    if (selection.size() == env.k()) {
      best = std::max(best, env.reward(doc, selection));
      return;
    }
    for (std::size_t i = 0; i < s_count; ++i) {
      if (used[i]) continue;
      used[i] = true;
      selection.push_back(i);
      self(self);
      selection.pop_back();
      used[i] = false;
    }
  };
  search(search);
  return best;
}

void write_rlhf_curve(std::ostream& out, std::span<const RlhfPoint> curve) {
  out << "update,mean_reward,rouge1_f1,rouge2_f1,rougeL_f1\n";
  char buf[192];
  for (const RlhfPoint& p : curve) {
    std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g\n", p.update, p.mean_reward,
                  p.rouge1_f1, p.rouge2_f1, p.rougeL_f1);
    out << buf;
  }
}

}  // namespace agreerm
