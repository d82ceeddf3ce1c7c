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

#include "agreerm/reward.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "agreerm/error.h"
#include "agreerm/rng.h"
#include "agreerm/synth.h"
#include "agreerm/text.h"

namespace agreerm {
namespace {

constexpr char kMagic[8] = {'A', 'G', 'R', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

// Score and score-gradient for parameters stored as scale * params. The
// trainer keeps the L2 decay in `scale` so sparse updates stay sparse.
double forward(std::span<const double> params, double scale, std::size_t hidden,
               const SparseVector& phi, std::vector<double>* activations) {
  if (hidden == 0) {
    double dot = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) dot += params[phi.indices[k]] * phi.values[k];
    return scale * dot;
  }
  std::vector<double> local;
  std::vector<double>& act = activations ? *activations : local;
  act.assign(hidden, 0.0);
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double* row = &params[static_cast<std::size_t>(phi.indices[k]) * hidden];
    for (std::size_t j = 0; j < hidden; ++j) act[j] += row[j] * phi.values[k];
  }
  const std::size_t out_offset = params.size() - hidden;
  double r = 0.0;
  for (std::size_t j = 0; j < hidden; ++j) {
    act[j] = std::tanh(scale * act[j]);
    r += scale * params[out_offset + j] * act[j];
  }
  return r;
}

// grad[k] += coef * d score / d theta_k, recording first touches in `touched`.
void backward(std::span<const double> params, double scale, std::size_t hidden,
              const SparseVector& phi, const std::vector<double>& activations, double coef,
              std::span<double> grad, std::vector<std::size_t>* touched,
              std::vector<char>* marks) {
  const auto add = [&](std::size_t k, double g) {
    if (touched && !(*marks)[k]) {
      (*marks)[k] = 1;
      touched->push_back(k);
    }
    grad[k] += g;
  };
  if (hidden == 0) {
    for (std::size_t k = 0; k < phi.size(); ++k) add(phi.indices[k], coef * phi.values[k]);
    return;
  }
  const std::size_t out_offset = params.size() - hidden;
  for (std::size_t j = 0; j < hidden; ++j) add(out_offset + j, coef * activations[j]);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double back =
        coef * scale * params[out_offset + j] * (1.0 - activations[j] * activations[j]);
    if (back == 0.0) continue;
    for (std::size_t k = 0; k < phi.size(); ++k) {
      add(static_cast<std::size_t>(phi.indices[k]) * hidden + j, back * phi.values[k]);
    }
  }
}

std::size_t parameter_count_for(const FeaturizerConfig& f, std::size_t hidden) {
  return hidden == 0 ? f.dimension : static_cast<std::size_t>(f.dimension) * hidden + hidden;
}

struct FeatureTable {
  std::vector<SparseVector> vectors;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t intern(const FeaturizerConfig& f, const std::string& post_id,
                     const std::string& context, const std::string& text) {
    std::string key = post_id;
    key.push_back('\x1f');
    key += text;
    auto [it, inserted] = index.try_emplace(std::move(key), vectors.size());
    if (inserted) vectors.push_back(featurize(f, context, text));
    return it->second;
  }
};

struct EncodedPair {
  std::size_t winner = 0;
  std::size_t loser = 0;
  double weight = 1.0;
};

struct EncodedTest {
  std::size_t majority = 0;
  std::size_t minority = 0;
};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("truncated checkpoint");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void FeaturizerConfig::validate() const {
  if (ngram_orders.empty()) throw Error("featurizer needs at least one n-gram order");
  for (int n : ngram_orders) {
    if (n != 1 && n != 2) throw Error("featurizer n-gram orders must be 1 or 2");
  }
  if (dimension < (1u << 10) || !std::has_single_bit(dimension)) {
    throw Error("featurizer dimension must be a power of two >= 1024");
  }
}

nlohmann::json FeaturizerConfig::to_json() const {
  return {{"ngram_orders", ngram_orders},
          {"dimension", dimension},
          {"hash_seed", hash_seed},
          {"context_conditioning", context_conditioning}};
}

FeaturizerConfig FeaturizerConfig::from_json(const nlohmann::json& j) {
  FeaturizerConfig f;
  f.ngram_orders = j.value("ngram_orders", f.ngram_orders);
  f.dimension = j.value("dimension", f.dimension);
  f.hash_seed = j.value("hash_seed", f.hash_seed);
  f.context_conditioning = j.value("context_conditioning", f.context_conditioning);
  f.validate();
  return f;
}

double SparseVector::mass() const {
  double m = 0.0;
  for (double v : values) m += v;
  return m;
}

SparseVector featurize(const FeaturizerConfig& config, std::string_view context,
                       std::string_view summary) {
  const std::vector<std::string> tokens = tokenize(summary);
  const std::uint32_t mask = config.dimension - 1;
  std::vector<std::uint32_t> hits;
  std::string key;
  for (int n : config.ngram_orders) {
    if (tokens.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      key.assign(1, static_cast<char>('0' + n));
      for (int t = 0; t < n; ++t) {
        key.push_back('\x1f');
        key += tokens[i + t];
      }
      hits.push_back(static_cast<std::uint32_t>(fingerprint64(key, config.hash_seed)) & mask);
    }
  }
  if (config.context_conditioning) {
    std::vector<std::string> ctx = tokenize(context);
    std::sort(ctx.begin(), ctx.end());
    ctx.erase(std::unique(ctx.begin(), ctx.end()), ctx.end());
    std::vector<std::string> sum = tokens;
    std::sort(sum.begin(), sum.end());
    sum.erase(std::unique(sum.begin(), sum.end()), sum.end());
    for (const std::string& c : ctx) {
      for (const std::string& s : sum) {
        key = "x\x1f" + c + '\x1f' + s;
        hits.push_back(static_cast<std::uint32_t>(fingerprint64(key, config.hash_seed)) & mask);
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  SparseVector out;
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    out.indices.push_back(hits[i]);
    out.values.push_back(static_cast<double>(j - i));
    i = j;
  }
  return out;
}

RewardModel::RewardModel(FeaturizerConfig featurizer, std::size_t hidden_units)
    : featurizer_(std::move(featurizer)), hidden_(hidden_units) {
  featurizer_.validate();
  params_.assign(parameter_count_for(featurizer_, hidden_), 0.0);
}

RewardModel::RewardModel(FeaturizerConfig featurizer, std::vector<double> parameters,
                         std::size_t hidden_units)
    : featurizer_(std::move(featurizer)), hidden_(hidden_units), params_(std::move(parameters)) {
  featurizer_.validate();
  if (params_.size() != parameter_count_for(featurizer_, hidden_)) {
    throw Error("parameter vector has " + std::to_string(params_.size()) +
                " entries, expected " +
                std::to_string(parameter_count_for(featurizer_, hidden_)));
  }
  for (double p : params_) {
    if (!std::isfinite(p)) throw Error("reward model parameters must be finite");
  }
}

RewardModel RewardModel::initial(FeaturizerConfig featurizer, std::size_t hidden_units,
                                 std::uint64_t seed) {
  RewardModel model(std::move(featurizer), hidden_units);
  if (hidden_units > 0) {
    Rng rng(seed);
    const std::size_t first_layer = model.params_.size() - hidden_units;
    for (std::size_t k = 0; k < first_layer; ++k) model.params_[k] = 0.1 * rng.normal();
  }
  return model;
}

double RewardModel::score(std::string_view context, std::string_view summary) const {
  return score(featurize(featurizer_, context, summary));
}

double RewardModel::score(const SparseVector& features) const {
  return forward(params_, 1.0, hidden_, features, nullptr);
}

void RewardModel::accumulate_score_gradient(const SparseVector& features, double scale,
                                            std::span<double> grad) const {
  std::vector<double> act;
  forward(params_, 1.0, hidden_, features, &act);
  backward(params_, 1.0, hidden_, features, act, scale, grad, nullptr, nullptr);
}

std::vector<PreferenceExample> expand_to_examples(std::span<const Comparison> comparisons) {
  std::vector<PreferenceExample> out;
  for (const Comparison& c : comparisons) {
    for (int v = 0; v < c.votes_a; ++v) out.push_back({c.post_id, c.summary_a, c.summary_b, 1.0});
    for (int v = 0; v < c.votes_b; ++v) out.push_back({c.post_id, c.summary_b, c.summary_a, 1.0});
  }
  return out;
}

double neg_log_sigmoid(double x) {
  return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double pairwise_loss(const RewardModel& model, std::span<const PreferenceExample> batch,
                     const ContextIndex& contexts, double l2_penalty) {
  if (batch.empty()) throw Error("pairwise loss needs a non-empty batch");
  double total = 0.0;
  double weights = 0.0;
  for (const PreferenceExample& ex : batch) {
    if (!(ex.weight > 0.0)) throw Error("preference example weight must be positive");
    const std::string& ctx = contexts.at(ex.post_id);
    const double delta = model.score(ctx, ex.winner_text) - model.score(ctx, ex.loser_text);
    total += ex.weight * neg_log_sigmoid(delta);
    weights += ex.weight;
  }
  double loss = total / weights;
  if (l2_penalty > 0.0) {
    double sq = 0.0;
    for (double p : model.parameters()) sq += p * p;
    loss += 0.5 * l2_penalty * sq;
  }
  return loss;
}

std::vector<double> gradient(const RewardModel& model, std::span<const PreferenceExample> batch,
                             const ContextIndex& contexts, double l2_penalty) {
  if (batch.empty()) throw Error("gradient needs a non-empty batch");
  double weights = 0.0;
  for (const PreferenceExample& ex : batch) weights += ex.weight;
  std::vector<double> grad(model.parameter_count(), 0.0);
  for (const PreferenceExample& ex : batch) {
    const std::string& ctx = contexts.at(ex.post_id);
    const SparseVector fw = featurize(model.featurizer(), ctx, ex.winner_text);
    const SparseVector fl = featurize(model.featurizer(), ctx, ex.loser_text);
    const double delta = model.score(fw) - model.score(fl);
    const double coef = -ex.weight * logistic(-delta) / weights;
    model.accumulate_score_gradient(fw, coef, grad);
    model.accumulate_score_gradient(fl, -coef, grad);
  }
  if (l2_penalty > 0.0) {
    const auto params = model.parameters();
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += l2_penalty * params[k];
  }
  return grad;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error("learning rate must be positive");
  }
  if (epochs < 0) throw Error("epochs must be non-negative");
  if (batch_size < 1) throw Error("batch size must be positive");
  if (!(l2_penalty >= 0.0) || learning_rate * l2_penalty >= 1.0) {
    throw Error("l2 penalty must be >= 0 with learning_rate * l2_penalty < 1");
  }
  if (eval_every < 1) throw Error("eval_every must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"epochs", epochs},
          {"batch_size", batch_size},       {"l2_penalty", l2_penalty},
          {"seed", seed},                   {"eval_every", eval_every},
          {"hidden_units", hidden_units}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.l2_penalty = j.value("l2_penalty", c.l2_penalty);
  c.seed = j.value("seed", c.seed);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.hidden_units = j.value("hidden_units", c.hidden_units);
  c.validate();
  return c;
}

namespace {

double accuracy_on(std::span<const double> params, double scale, std::size_t hidden,
                   const FeatureTable& table, std::span<const EncodedTest> tests) {
  double correct = 0.0;
  for (const EncodedTest& t : tests) {
    const double hi = forward(params, scale, hidden, table.vectors[t.majority], nullptr);
    const double lo = forward(params, scale, hidden, table.vectors[t.minority], nullptr);
    if (hi > lo) {
      correct += 1.0;
    } else if (hi == lo) {
      correct += 0.5;
    }
  }
  return correct / static_cast<double>(tests.size());
}

}  // namespace

AccuracyResult accuracy(const RewardModel& model, std::span<const Comparison> test,
                        const ContextIndex& contexts) {
  if (test.empty()) throw Error("accuracy needs a non-empty test set");
  AccuracyResult result;
  double correct = 0.0;
  for (const Comparison& c : test) {
    if (c.votes_a == c.votes_b) {
      ++result.vote_ties;
      continue;
    }
    const std::string& ctx = contexts.at(c.post_id);
    const bool a_wins = c.votes_a > c.votes_b;
    const double hi = model.score(ctx, a_wins ? c.summary_a : c.summary_b);
    const double lo = model.score(ctx, a_wins ? c.summary_b : c.summary_a);
    ++result.decidable;
    if (hi > lo) {
      correct += 1.0;
    } else if (hi == lo) {
      correct += 0.5;
    }
  }
  if (result.decidable == 0) throw Error("no decidable test items: every comparison is vote-tied");
  result.accuracy = correct / static_cast<double>(result.decidable);
  return result;
}

TrainResult train(std::span<const PreferenceExample> examples, const TrainConfig& config,
                  const FeaturizerConfig& featurizer, const ContextIndex& contexts,
                  std::span<const Comparison> eval_set) {
  config.validate();
  featurizer.validate();
  if (examples.empty()) throw Error("training needs at least one preference example");

  FeatureTable table;
  std::vector<EncodedPair> pairs;
  pairs.reserve(examples.size());
  for (const PreferenceExample& ex : examples) {
    if (!(ex.weight > 0.0)) throw Error("preference example weight must be positive");
    const std::string& ctx = contexts.at(ex.post_id);
    pairs.push_back({table.intern(featurizer, ex.post_id, ctx, ex.winner_text),
                     table.intern(featurizer, ex.post_id, ctx, ex.loser_text), ex.weight});
  }
  std::vector<EncodedTest> tests;
  for (const Comparison& c : eval_set) {
    if (c.votes_a == c.votes_b) continue;
    const std::string& ctx = contexts.at(c.post_id);
    const std::size_t a = table.intern(featurizer, c.post_id, ctx, c.summary_a);
    const std::size_t b = table.intern(featurizer, c.post_id, ctx, c.summary_b);
    tests.push_back(c.votes_a > c.votes_b ? EncodedTest{a, b} : EncodedTest{b, a});
  }
  const bool evaluate = !tests.empty();
  const double no_eval = std::numeric_limits<double>::quiet_NaN();

  RewardModel init = RewardModel::initial(featurizer, config.hidden_units, config.seed);
  const std::size_t hidden = config.hidden_units;
  std::vector<double> v(init.parameters().begin(), init.parameters().end());
  double scale = 1.0;

  std::vector<double> grad(v.size(), 0.0);
  std::vector<char> marks(v.size(), 0);
  std::vector<std::size_t> touched;
  std::vector<double> act_w, act_l;

  const auto loss_of = [&](const EncodedPair& p, double* delta_out) {
    const double delta = forward(v, scale, hidden, table.vectors[p.winner], nullptr) -
                         forward(v, scale, hidden, table.vectors[p.loser], nullptr);
    if (delta_out) *delta_out = delta;
    return neg_log_sigmoid(delta);
  };

  std::vector<CurvePoint> curve;
  {
    double total = 0.0, weights = 0.0;
    for (const EncodedPair& p : pairs) {
      total += p.weight * loss_of(p, nullptr);
      weights += p.weight;
    }
    curve.push_back({0, total / weights,
                     evaluate ? accuracy_on(v, scale, hidden, table, tests) : no_eval});
  }

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed);
  const double decay = 1.0 - config.learning_rate * config.l2_penalty;

  std::size_t step = 0;
  double window_loss = 0.0;
  std::size_t window_batches = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      double weights = 0.0;
      for (std::size_t i = start; i < end; ++i) weights += pairs[order[i]].weight;

      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const EncodedPair& p = pairs[order[i]];
        const SparseVector& fw = table.vectors[p.winner];
        const SparseVector& fl = table.vectors[p.loser];
        const double delta = forward(v, scale, hidden, fw, &act_w) -
                             forward(v, scale, hidden, fl, &act_l);
        batch_loss += p.weight * neg_log_sigmoid(delta);
        const double coef = -p.weight * logistic(-delta) / weights;
        backward(v, scale, hidden, fw, act_w, coef, grad, &touched, &marks);
        backward(v, scale, hidden, fl, act_l, -coef, grad, &touched, &marks);
      }
      batch_loss /= weights;
      if (!std::isfinite(batch_loss)) {
        throw Error("non-finite training loss at step " + std::to_string(step + 1));
      }

      // theta' = decay * theta - lr * g, with theta = scale * v.
      scale *= decay;
      for (std::size_t k : touched) {
        v[k] -= config.learning_rate * grad[k] / scale;
        grad[k] = 0.0;
        marks[k] = 0;
      }
      touched.clear();
      if (scale < 1e-6) {
        for (double& x : v) x *= scale;
        scale = 1.0;
      }

      ++step;
      window_loss += batch_loss;
      ++window_batches;
      if (step % config.eval_every == 0) {
        curve.push_back({step, window_loss / window_batches,
                         evaluate ? accuracy_on(v, scale, hidden, table, tests) : no_eval});
        window_loss = 0.0;
        window_batches = 0;
      }
    }
  }
  if (window_batches > 0) {
    curve.push_back({step, window_loss / window_batches,
                     evaluate ? accuracy_on(v, scale, hidden, table, tests) : no_eval});
  }

  for (double& x : v) x *= scale;
  RewardModel model(featurizer, std::move(v), hidden);
  model.train_meta = {{"train_config", config.to_json()},
                      {"examples", examples.size()},
                      {"steps", step},
                      {"final_train_loss", curve.back().train_loss}};
  if (evaluate) model.train_meta["final_test_accuracy"] = curve.back().test_accuracy;
  return {std::move(model), std::move(curve)};
}

void save_model(const std::string& path, const RewardModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const FeaturizerConfig& f = model.featurizer();
  const nlohmann::json header = {{"format", "agreerm-reward-model"},
                                 {"version", kCheckpointVersion},
                                 {"featurizer", f.to_json()},
                                 {"dimension", f.dimension},
                                 {"hash_seed", f.hash_seed},
                                 {"hidden_units", model.hidden_units()},
                                 {"parameter_count", model.parameter_count()},
                                 {"train_meta", model.train_meta}};
  const std::string text = header.dump();
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<char> buf(model.parameter_count() * 8);
  std::size_t pos = 0;
  for (double p : model.parameters()) {
    const auto bits = std::bit_cast<std::uint64_t>(p);
    for (int i = 0; i < 8; ++i) buf[pos++] = static_cast<char>((bits >> (8 * i)) & 0xff);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

RewardModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error("'" + path + "' is not a reward model checkpoint");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t header_len = get_u32(in);
  std::string text(header_len, '\0');
  if (!in.read(text.data(), header_len)) throw Error("truncated checkpoint header");
  const nlohmann::json header = nlohmann::json::parse(text);
  const FeaturizerConfig f = FeaturizerConfig::from_json(header.at("featurizer"));
  const std::size_t hidden = header.at("hidden_units").get<std::size_t>();
  const std::size_t count = header.at("parameter_count").get<std::size_t>();
  std::vector<char> buf(count * 8);
  if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size()))) {
    throw Error("truncated checkpoint parameters");
  }
  std::vector<double> params(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[k * 8 + i])) << (8 * i);
    }
    params[k] = std::bit_cast<double>(bits);
  }
  RewardModel model(f, std::move(params), hidden);
  model.train_meta = header.value("train_meta", nlohmann::json::object());
  return model;
}

void write_learning_curve(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "step,train_loss,test_accuracy\n";
  char buf[128];
  for (const CurvePoint& p : curve) {
    if (std::isnan(p.test_accuracy)) {
      std::snprintf(buf, sizeof(buf), "%zu,%.10g,\n", p.step, p.train_loss);
    } else {
      std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g\n", p.step, p.train_loss,
                    p.test_accuracy);
    }
    out << buf;
  }
}

}  // namespace agreerm
