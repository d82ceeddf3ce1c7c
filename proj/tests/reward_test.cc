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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agreerm/error.h"
#include "agreerm/rng.h"
#include "agreerm/sampler.h"
#include "agreerm/synth.h"
#include "agreerm/text.h"
#include "doctest.h"

using namespace agreerm;

namespace {

FeaturizerConfig small_featurizer(bool context = false) {
  FeaturizerConfig f;
  f.dimension = 1u << 10;
  f.context_conditioning = context;
  return f;
}

const std::vector<Post>& toy_posts() {
  static const std::vector<Post> posts = {
      {"p1", "Cats", "The cat sat on the mat. It was sunny.", ""},
      {"p2", "", "My landlord kept my deposit. He refuses to return it.", ""},
  };
  return posts;
}

std::vector<PreferenceExample> random_batch(Rng& rng, std::size_t size) {
  static const char* words[] = {"cat", "mat", "sat", "deposit", "landlord", "sun", "the", "kept"};
  const auto phrase = [&] {
    std::string s;
    const std::size_t len = 1 + rng.below(6);
    for (std::size_t i = 0; i < len; ++i) s += std::string(i ? " " : "") + words[rng.below(8)];
    return s;
  };
  std::vector<PreferenceExample> batch;
  for (std::size_t i = 0; i < size; ++i) {
    batch.push_back({rng.below(2) ? "p1" : "p2", phrase(), phrase(), 0.5 + rng.uniform()});
  }
  return batch;
}

// Naive dot product recomputation over the sparse vector.
double naive_linear_score(const RewardModel& m, const SparseVector& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += m.parameters()[f.indices[i]] * f.values[i];
  return s;
}

}  // namespace

TEST_CASE("featurize counts n-grams") {
  FeaturizerConfig f;
  const SparseVector v = featurize(f, "", "the cat the");
  CHECK(v.mass() == 5.0);
  CHECK(std::is_sorted(v.indices.begin(), v.indices.end()));
  CHECK(std::adjacent_find(v.indices.begin(), v.indices.end()) == v.indices.end());

  f.ngram_orders = {1};
  CHECK(featurize(f, "", "one two three four").mass() == 4.0);
  const SparseVector again = featurize(f, "ctx", "one two three four");
  CHECK(again.indices == featurize(f, "ctx", "one two three four").indices);

  FeaturizerConfig c = small_featurizer(true);
  c.ngram_orders = {1};
  // 2 summary unigrams plus 2 x 2 distinct context pairs.
  CHECK(featurize(c, "red fox red", "blue sky").mass() == 2.0 + 4.0);

  FeaturizerConfig bad;
  bad.dimension = 1000;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = FeaturizerConfig{};
  bad.ngram_orders = {3};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("linear scores") {
  const FeaturizerConfig f = small_featurizer();
  const RewardModel zero(f);
  CHECK(zero.score("anything", "at all") == 0.0);

  FeaturizerConfig uni = f;
  uni.ngram_orders = {1};
  const SparseVector word = featurize(uni, "", "cat");
  REQUIRE(word.size() == 1);
  std::vector<double> theta(uni.dimension, 0.0);
  theta[word.indices[0]] = 1.0;
  CHECK(RewardModel(uni, theta).score("", "cat") == 1.0);

  Rng rng(1);
  std::vector<double> random(f.dimension);
  for (double& x : random) x = rng.normal();
  const RewardModel model(f, random);
  const SparseVector fv = featurize(f, "", "the cat sat on the mat and the cat slept");
  CHECK(model.score(fv) == doctest::Approx(naive_linear_score(model, fv)).epsilon(1e-14));
  CHECK_THROWS_AS(RewardModel(f, std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("neg_log_sigmoid and loss closed forms") {
  CHECK(neg_log_sigmoid(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(neg_log_sigmoid(30.0) < 1e-12);
  CHECK(neg_log_sigmoid(30.0) > 0.0);
  CHECK(neg_log_sigmoid(1.0) == doctest::Approx(0.31326168751822286).epsilon(1e-14));
  CHECK(neg_log_sigmoid(-1000.0) == doctest::Approx(1000.0));
  CHECK(std::isfinite(neg_log_sigmoid(1000.0)));
  for (double x : {-5.0, -0.3, 0.0, 0.7, 12.0}) {
    CHECK(neg_log_sigmoid(x) - neg_log_sigmoid(-x) == doctest::Approx(-x).epsilon(1e-12));
  }
}

TEST_CASE("loss at zero parameters is ln 2 on any batch") {
  Rng rng(2);
  const ContextIndex contexts(toy_posts());
  for (std::size_t hidden : {0u, 3u}) {
    RewardModel m(small_featurizer(true), hidden);
    for (int trial = 0; trial < 20; ++trial) {
      const auto batch = random_batch(rng, 1 + rng.below(10));
      CHECK(std::abs(pairwise_loss(m, batch, contexts) - std::log(2.0)) < 1e-9);
    }
  }
  CHECK_THROWS_AS(pairwise_loss(RewardModel(small_featurizer()), {}, contexts), Error);
}

TEST_CASE("loss for a fixed score gap") {
  FeaturizerConfig uni = small_featurizer();
  uni.ngram_orders = {1};
  const SparseVector word = featurize(uni, "", "good");
  std::vector<double> theta(uni.dimension, 0.0);
  const ContextIndex contexts(toy_posts());
  const std::vector<PreferenceExample> batch = {{"p1", "good", "bad", 1.0}};
  theta[word.indices[0]] = 1.0;
  CHECK(pairwise_loss(RewardModel(uni, theta), batch, contexts) ==
        doctest::Approx(0.313262).epsilon(1e-6));
  theta[word.indices[0]] = 30.0;
  CHECK(pairwise_loss(RewardModel(uni, theta), batch, contexts) < 1e-12);
  theta[word.indices[0]] = 1000.0;
  const RewardModel saturated(uni, theta);
  CHECK(pairwise_loss(saturated, batch, contexts) >= 0.0);
  double norm = 0.0;
  for (double g : gradient(saturated, batch, contexts)) norm += g * g;
  CHECK(std::sqrt(norm) < 1e-12);
}

TEST_CASE("gradient at zero for one example is -0.5 (phi_w - phi_l)") {
  const FeaturizerConfig f = small_featurizer();
  const ContextIndex contexts(toy_posts());
  const std::vector<PreferenceExample> batch = {{"p1", "cat sat", "mat"}};
  const std::vector<double> g = gradient(RewardModel(f), batch, contexts);
  std::vector<double> expected(f.dimension, 0.0);
  const SparseVector w = featurize(f, "", "cat sat"), l = featurize(f, "", "mat");
  for (std::size_t i = 0; i < w.size(); ++i) expected[w.indices[i]] -= 0.5 * w.values[i];
  for (std::size_t i = 0; i < l.size(); ++i) expected[l.indices[i]] += 0.5 * l.values[i];
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(expected[i]));
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(3);
  const ContextIndex contexts(toy_posts());
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t hidden = trial % 2 ? 4 : 0;
    const FeaturizerConfig f = small_featurizer(trial % 4 < 2);
    RewardModel base = RewardModel::initial(f, hidden, trial);
    std::vector<double> params(base.parameters().begin(), base.parameters().end());
    for (double& p : params) p = 0.3 * rng.normal();
    const double l2 = trial % 3 ? 1e-3 : 0.0;
    const auto batch = random_batch(rng, 1 + rng.below(6));
    const std::vector<double> g = gradient(RewardModel(f, params, hidden), batch, contexts, l2);

    // Half the probes on coordinates the batch touches.
    std::vector<std::size_t> probes;
    for (std::size_t i = 0; i < g.size() && probes.size() < 25; ++i) {
      if (g[i] != l2 * params[i]) probes.push_back(i);
    }
    while (probes.size() < 50) probes.push_back(rng.below(params.size()));

    const double h = 1e-5;
    for (std::size_t i : probes) {
      std::vector<double> up = params, down = params;
      up[i] += h;
      down[i] -= h;
      const double fd = (pairwise_loss(RewardModel(f, up, hidden), batch, contexts, l2) -
                         pairwise_loss(RewardModel(f, down, hidden), batch, contexts, l2)) /
                        (2 * h);
      const double rel = std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-3});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("accumulate_score_gradient matches finite differences for the MLP") {
  Rng rng(4);
  const FeaturizerConfig f = small_featurizer();
  RewardModel base = RewardModel::initial(f, 5, 9);
  std::vector<double> params(base.parameters().begin(), base.parameters().end());
  for (double& p : params) p = 0.5 * rng.normal();
  const RewardModel m(f, params, 5);
  const SparseVector x = featurize(f, "", "the landlord kept the deposit");
  std::vector<double> g(params.size(), 0.0);
  m.accumulate_score_gradient(x, 1.0, g);
  for (int k = 0; k < 50; ++k) {
    const std::size_t i = k < 25 ? x.indices[k % x.size()] * 5 + k % 5 : params.size() - 1 - k % 5;
    std::vector<double> up = params, down = params;
    up[i] += 1e-6;
    down[i] -= 1e-6;
    const double fd = (RewardModel(f, up, 5).score(x) - RewardModel(f, down, 5).score(x)) / 2e-6;
    CHECK(fd == doctest::Approx(g[i]).epsilon(1e-6));
  }
}

TEST_CASE("expand_to_examples emits one example per vote") {
  Comparison tie{"c", "p", "a", "b", 11, 11, "", ""};
  Comparison unanimous{"d", "p", "a", "b", 0, 22, "", ""};
  Comparison single{"e", "p", "a", "b", 1, 0, "", ""};
  CHECK(expand_to_examples(std::vector<Comparison>{single}).size() == 1);
  const auto u = expand_to_examples(std::vector<Comparison>{unanimous});
  CHECK(u.size() == 22);
  CHECK(std::all_of(u.begin(), u.end(), [](const PreferenceExample& e) { return e.winner_text == "b"; }));
  const auto t = expand_to_examples(std::vector<Comparison>{tie});
  CHECK(t.size() == 22);
  CHECK(std::count_if(t.begin(), t.end(), [](const PreferenceExample& e) { return e.winner_text == "a"; }) == 11);
  for (const PreferenceExample& e : t) CHECK(e.weight == 1.0);
}

TEST_CASE("one training step is theta - lr * gradient") {
  Rng rng(5);
  const ContextIndex contexts(toy_posts());
  const auto batch = random_batch(rng, 8);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = batch.size();
  cfg.learning_rate = 0.3;
  cfg.l2_penalty = 0.01;
  const FeaturizerConfig f = small_featurizer(true);
  const TrainResult r = train(batch, cfg, f, contexts);
  const std::vector<double> g = gradient(RewardModel(f), batch, contexts, cfg.l2_penalty);
  REQUIRE(r.model.parameter_count() == g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(r.model.parameters()[i] == doctest::Approx(-cfg.learning_rate * g[i]).epsilon(1e-12));
  }
}

TEST_CASE("training edge cases") {
  Rng rng(6);
  const ContextIndex contexts(toy_posts());
  const auto batch = random_batch(rng, 20);
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult none = train(batch, cfg, small_featurizer(), contexts);
  for (double p : none.model.parameters()) CHECK(p == 0.0);
  CHECK(none.model.score("x", "any text") == 0.0);

  cfg.epochs = 2;
  const TrainResult a = train(batch, cfg, small_featurizer(), contexts);
  const TrainResult b = train(batch, cfg, small_featurizer(), contexts);
  CHECK(std::equal(a.model.parameters().begin(), a.model.parameters().end(),
                   b.model.parameters().begin()));
  CHECK(a.curve.front().step == 0);
  CHECK(a.curve.front().train_loss == doctest::Approx(std::log(2.0)));

  CHECK_THROWS_AS(train({}, cfg, small_featurizer(), contexts), Error);
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train(batch, cfg, small_featurizer(), contexts), Error);
  cfg.learning_rate = 1e300;
  CHECK_THROWS_AS(train(batch, cfg, small_featurizer(), contexts), Error);
}

TEST_CASE("accuracy counting") {
  FeaturizerConfig uni = small_featurizer();
  uni.ngram_orders = {1};
  std::vector<double> theta(uni.dimension, 0.0);
  theta[featurize(uni, "", "good").indices[0]] = 1.0;
  const RewardModel m(uni, theta);
  const ContextIndex contexts(toy_posts());
  const std::vector<Comparison> test = {
      {"1", "p1", "bad", "good", 0, 3, "", ""},   // right
      {"2", "p1", "bad", "good", 3, 1, "", ""},   // wrong
      {"3", "p1", "good", "great", 2, 0, "", ""},  // right
      {"4", "p1", "meh", "worse", 1, 0, "", ""},  // score tie, 0.5
      {"5", "p1", "bad", "good", 2, 2, "", ""},   // vote tie, excluded
  };
  const AccuracyResult r = accuracy(m, test, contexts);
  CHECK(r.decidable == 4);
  CHECK(r.vote_ties == 1);
  CHECK(r.accuracy == doctest::Approx(2.5 / 4));
  CHECK_THROWS_WITH_AS(accuracy(m, std::vector<Comparison>{test[4]}, contexts),
                       doctest::Contains("no decidable test items"), Error);
  CHECK_THROWS_AS(accuracy(m, {}, contexts), Error);
}

TEST_CASE("swapping winners mirrors accuracy") {
  Rng rng(7);
  const FeaturizerConfig f = small_featurizer();
  std::vector<double> theta(f.dimension);
  for (double& x : theta) x = rng.normal();
  const RewardModel m(f, theta);
  SynthConfig sc;
  sc.n_posts = 40;
  sc.seed = 3;
  const SyntheticCorpus corpus = generate_corpus(sc);
  const ContextIndex contexts(corpus.posts);
  std::vector<Comparison> swapped = corpus.comparisons;
  for (Comparison& c : swapped) std::swap(c.votes_a, c.votes_b);
  const AccuracyResult a = accuracy(m, corpus.comparisons, contexts);
  const AccuracyResult b = accuracy(m, swapped, contexts);
  CHECK(a.accuracy + b.accuracy == doctest::Approx(1.0));

  // Swapped examples at the symmetric point give the same loss.
  const auto ex = expand_to_examples(corpus.comparisons);
  const auto sx = expand_to_examples(swapped);
  const RewardModel zero(f);
  CHECK(pairwise_loss(zero, ex, contexts) + pairwise_loss(zero, sx, contexts) ==
        doctest::Approx(2 * std::log(2.0)));
}

TEST_CASE("a constant feature shifts scores without reordering") {
  Rng rng(8);
  const FeaturizerConfig f = small_featurizer();
  std::vector<double> theta(f.dimension);
  for (double& x : theta) x = rng.normal();
  const RewardModel m(f, theta);
  const std::uint32_t k = 1000;
  const auto with_constant = [&](SparseVector v) {
    const auto it = std::lower_bound(v.indices.begin(), v.indices.end(), k);
    const std::size_t pos = it - v.indices.begin();
    if (it != v.indices.end() && *it == k) {
      v.values[pos] += 1.0;
    } else {
      v.indices.insert(it, k);
      v.values.insert(v.values.begin() + pos, 1.0);
    }
    return v;
  };
  const char* texts[] = {"cat sat", "the landlord", "deposit kept by landlord", "sunny mat", "x"};
  for (const char* a : texts) {
    for (const char* b : texts) {
      const SparseVector fa = featurize(f, "", a), fb = featurize(f, "", b);
      const double before = m.score(fa) - m.score(fb);
      const double after = m.score(with_constant(fa)) - m.score(with_constant(fb));
      CHECK(after == doctest::Approx(before).epsilon(1e-12));
      CHECK(m.score(with_constant(fa)) - m.score(fa) == doctest::Approx(theta[k]));
    }
  }
}

TEST_CASE("checkpoint round-trip") {
  Rng rng(9);
  const ContextIndex contexts(toy_posts());
  TrainConfig cfg;
  cfg.hidden_units = 2;
  const TrainResult r = train(random_batch(rng, 30), cfg, small_featurizer(true), contexts);
  RewardModel model = r.model;
  model.train_meta = {{"strategy", "rand"}, {"examples", 30}};
  const std::string path = "reward_test_model.bin";
  save_model(path, model);
  const RewardModel back = load_model(path);
  CHECK(back.hidden_units() == 2);
  CHECK(back.featurizer().to_json() == model.featurizer().to_json());
  CHECK(back.train_meta == model.train_meta);
  CHECK(std::equal(back.parameters().begin(), back.parameters().end(),
                   model.parameters().begin(), model.parameters().end()));
  CHECK(back.score("ctx", "the cat") == model.score("ctx", "the cat"));

  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint";
  }
  CHECK_THROWS_AS(load_model(path), Error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_model(path), Error);
}

TEST_CASE("learning curve CSV") {
  std::ostringstream out;
  const std::vector<CurvePoint> curve = {{0, 0.693, 0.5}, {10, 0.5, 0.75}};
  write_learning_curve(out, curve);
  CHECK(out.str().find("step,train_loss,test_accuracy") != std::string::npos);
  CHECK(out.str().find("10,0.5,0.75") != std::string::npos);
}

TEST_CASE("linearly separable preferences are learned") {
  // Summaries are bags of vocabulary words; a hidden linear scorer over
  // unigram counts decides every vote (beta = 1e3 Bradley-Terry annotators).
  Rng rng(31);
  std::vector<std::string> vocab;
  std::vector<double> weight;
  for (int i = 0; i < 200; ++i) {
    vocab.push_back("w" + std::to_string(i));
    weight.push_back(rng.normal());
  }
  const auto summary = [&](double& q) {
    std::string s;
    q = 0.0;
    const std::size_t len = 4 + rng.below(8);
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t w = rng.below(vocab.size());
      s += (i ? " " : "") + vocab[w];
      q += weight[w];
    }
    return s;
  };
  const std::vector<Post> posts = {{"p", "", "context", ""}};
  const AnnotatorModel annotator{1e3, 5};
  std::vector<Comparison> all;
  for (int i = 0; i < 3000; ++i) {
    double qa = 0.0, qb = 0.0;
    Comparison c{"c" + std::to_string(i), "p", summary(qa), summary(qb), 0, 0, "", ""};
    if (c.summary_a == c.summary_b) continue;
    for (int v = 0; v < annotator.annotators_per_comparison; ++v) {
      (rng.bernoulli(vote_probability(annotator, qa, qb)) ? c.votes_a : c.votes_b) += 1;
    }
    normalize_order(c);
    all.push_back(c);
  }
  const std::vector<Comparison> train_set(all.begin(), all.begin() + 2400);
  const std::vector<Comparison> test_set(all.begin() + 2400, all.end());

  const ContextIndex contexts(posts);
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.learning_rate = 0.1;
  cfg.l2_penalty = 0.0;
  FeaturizerConfig f;
  f.ngram_orders = {1};
  const TrainResult r = train(expand_to_examples(train_set), cfg, f, contexts, test_set);
  const double acc = accuracy(r.model, test_set, contexts).accuracy;
  MESSAGE("separable held-out accuracy " << acc);
  CHECK(acc >= 0.95);
  CHECK(r.curve.back().test_accuracy == doctest::Approx(acc));
}
