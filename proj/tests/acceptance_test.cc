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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "agreerm/agreement.h"
#include "agreerm/corpus.h"
#include "agreerm/eval.h"
#include "agreerm/experiment.h"
#include "agreerm/reward.h"
#include "agreerm/rlhf.h"
#include "agreerm/rng.h"
#include "agreerm/sampler.h"
#include "agreerm/synth.h"
#include "agreerm/text.h"

using namespace agreerm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- oracles

double brute_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  std::int64_t c = 0, d = 0, tx = 0, ty = 0, n0 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++n0;
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0) ++tx;
      if (dy == 0) ++ty;
      if (dx != 0 && dy != 0) ((dx > 0) == (dy > 0) ? c : d) += 1;
    }
  }
  return static_cast<double>(c - d) /
         std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
}

std::size_t exhaustive_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::vector<std::string>& s = a.size() <= b.size() ? a : b;
  const std::vector<std::string>& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
    std::size_t pos = 0, len = 0;
    bool ok = true;
    for (std::size_t i = 0; i < s.size() && ok; ++i) {
      if (!((mask >> i) & 1)) continue;
      while (pos < t.size() && t[pos] != s[i]) ++pos;
      if (pos == t.size()) {
        ok = false;
      } else {
        ++pos;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

double enumerate_pairwise(int a, int b) {
  std::vector<int> votes(a, 0);
  votes.insert(votes.end(), b, 1);
  long agree = 0, total = 0;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    for (std::size_t j = i + 1; j < votes.size(); ++j) {
      ++total;
      agree += votes[i] == votes[j];
    }
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

// ---------------------------------------------------------------- fixtures

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

FeaturizerConfig small_featurizer(bool context) {
  FeaturizerConfig f;
  f.dimension = 1u << 10;
  f.context_conditioning = context;
  return f;
}

// Synthetic corpus split into a held-out test set and an agreement pool.
struct SplitCorpus {
  SyntheticCorpus corpus;
  std::map<std::string, const Comparison*> by_id;
  std::vector<Comparison> test;
  std::vector<AgreementRecord> pool;

  SplitCorpus(std::size_t posts, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_posts = posts;
    cfg.seed = seed;
    corpus = generate_corpus(cfg);
    std::vector<std::string> ids;
    for (const Comparison& c : corpus.comparisons) {
      ids.push_back(c.id);
      by_id[c.id] = &c;
    }
    const DatasetSplit split = holdout_split(ids, kDefaultTestSize, seed);
    for (const std::string& id : split.test_ids) test.push_back(*by_id.at(id));
    for (const std::string& id : split.train_ids) pool.push_back(agreement_record(*by_id.at(id)));
  }

  std::vector<Comparison> curated(Strategy s, std::uint64_t seed) const {
    SamplingSpec spec;
    spec.strategy = s;
    spec.seed = seed;
    std::vector<Comparison> out;
    for (const std::string& id : sample(pool, spec)) out.push_back(*by_id.at(id));
    return out;
  }
};

// ---------------------------------------------------------------- criteria

Outcome loss_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  const ContextIndex contexts(toy_posts());
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const RewardModel zero(small_featurizer(trial % 2), trial % 3 ? 0 : 4);
    const auto batch = random_batch(rng, 1 + rng.below(32));
    worst = std::max(worst, std::abs(pairwise_loss(zero, batch, contexts) - std::log(2.0)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 1.0,
          "max |loss - ln 2| = " + fmt("%.3g", worst) + " over 200 batches, " + fmt("%.2f", secs) + " s"};
}

Outcome gradient_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(202);
  const ContextIndex contexts(toy_posts());
  double rm_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t hidden = trial % 2 ? 4 : 0;
    const FeaturizerConfig f = small_featurizer(trial % 4 < 2);
    const RewardModel base = RewardModel::initial(f, hidden, trial);
    std::vector<double> params(base.parameters().begin(), base.parameters().end());
    for (double& p : params) p = 0.3 * rng.normal();
    const double l2 = trial % 3 ? 1e-3 : 0.0;
    const auto batch = random_batch(rng, 1 + rng.below(6));
    const std::vector<double> g = gradient(RewardModel(f, params, hidden), batch, contexts, l2);
    std::vector<std::size_t> probes;
    for (std::size_t i = 0; i < g.size() && probes.size() < 25; ++i) {
      if (g[i] != l2 * params[i]) probes.push_back(i);
    }
    while (probes.size() < 50) probes.push_back(rng.below(params.size()));
    for (std::size_t i : probes) {
      std::vector<double> up = params, down = params;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      const double fd = (pairwise_loss(RewardModel(f, up, hidden), batch, contexts, l2) -
                         pairwise_loss(RewardModel(f, down, hidden), batch, contexts, l2)) /
                        2e-5;
      rm_worst = std::max(rm_worst, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-3}));
    }
  }

  // Single-step environment: one decision among 2-5 actions per episode.
  double pg_worst = 0.0;
  PPOConfig cfg;
  cfg.clip_epsilon = 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t f = ExtractiveEnv::kFeatureCount;
    std::vector<double> params(f), reference(f), logp;
    for (double& p : params) p = 0.2 * rng.normal();
    for (double& p : reference) p = 0.2 * rng.normal();
    TrajectoryBatch batch;
    for (std::size_t e = 0, n = 1 + rng.below(8); e < n; ++e) {
      TrajectoryStep st;
      st.actions = 2 + rng.below(4);
      st.features.resize(st.actions * f);
      for (double& x : st.features) x = rng.normal();
      st.action = rng.below(st.actions);
      Policy::log_probabilities(params, st.features, st.actions, logp);
      st.old_log_prob = logp[st.action] + 0.1 * rng.normal();
      Episode ep;
      ep.steps.push_back(st);
      ep.advantage = rng.normal();
      batch.episodes.push_back(ep);
    }
    const SurrogateValue v = evaluate_surrogate(params, reference, batch, cfg);
    for (std::size_t i = 0; i < f; ++i) {
      std::vector<double> up = params, down = params;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      const double fd = (evaluate_surrogate(up, reference, batch, cfg).objective -
                         evaluate_surrogate(down, reference, batch, cfg).objective) /
                        2e-5;
      pg_worst = std::max(pg_worst, std::abs(fd - v.objective_grad[i]) /
                                        std::max({std::abs(fd), std::abs(v.objective_grad[i]), 1e-3}));
    }
  }
  const double secs = seconds_since(t0);
  return {rm_worst < 1e-5 && pg_worst < 1e-4 && secs < 30.0,
          "reward max rel err " + fmt("%.3g", rm_worst) + ", surrogate max rel err " + fmt("%.3g", pg_worst) +
              ", " + fmt("%.2f", secs) + " s"};
}

Outcome agreement_arithmetic() {
  bool ok = comparison_agreement(11, 11) == 0.5 && comparison_agreement(0, 22) == 1.0;
  int checked = 0;
  double worst = 0.0;
  for (int a = 0; a <= 30; ++a) {
    for (int b = 0; a + b <= 30; ++b) {
      if (a + b < 2) continue;
      worst = std::max(worst, std::abs(pairwise_agreement(a, b) - enumerate_pairwise(a, b)));
      ++checked;
    }
  }
  ok = ok && worst <= 1e-14;
  return {ok, "(11,11)=" + fmt("%g", comparison_agreement(11, 11)) + ", (0,22)=" +
                  fmt("%g", comparison_agreement(0, 22)) + ", " + std::to_string(checked) +
                  " tallies vs enumeration, max err " + fmt("%.3g", worst)};
}

Outcome metric_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(404);
  int mismatches = 0, compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<double> x(n), y(n);
    for (double& v : x) v = trial % 2 ? static_cast<double>(rng.below(5)) : rng.normal();
    for (double& v : y) v = static_cast<double>(rng.below(3 + trial % 7));
    bool x_const = true, y_const = true;
    for (std::size_t i = 1; i < n; ++i) {
      x_const &= x[i] == x[0];
      y_const &= y[i] == y[0];
    }
    if (x_const || y_const) continue;
    ++compared;
    mismatches += kendall_tau_b(x, y) != brute_tau_b(x, y);
  }
  int lcs_bad = 0;
  const char* words[] = {"a", "b", "c"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> a(rng.below(11)), b(rng.below(11));
    for (std::string& w : a) w = words[rng.below(3)];
    for (std::string& w : b) w = words[rng.below(3)];
    lcs_bad += lcs_length(a, b) != exhaustive_lcs(a, b);
    if (!b.empty()) {
      const RougeScore r = rouge_l(a, b);
      const double lcs = static_cast<double>(exhaustive_lcs(a, b));
      const double rec = lcs / b.size();
      lcs_bad += std::abs(r.recall - rec) > 1e-15;
    }
  }
  const RougeScore hand = rouge_n("the cat sat", "the cat ate", 1);
  const bool rouge_ok = hand.precision == 2.0 / 3.0 && hand.recall == 2.0 / 3.0 &&
                        std::abs(hand.f1 - 2.0 / 3.0) < 1e-15;
  const double secs = seconds_since(t0);
  return {mismatches == 0 && compared > 900 && lcs_bad == 0 && rouge_ok && secs < 60.0,
          "kendall " + std::to_string(compared - mismatches) + "/" + std::to_string(compared) +
              " exact, lcs mismatches " + std::to_string(lcs_bad) + ", rouge-1 hand example " +
              (rouge_ok ? "exact" : "wrong") + ", " + fmt("%.2f", secs) + " s"};
}

Outcome quality_thesis() {
  SynthConfig cfg;
  cfg.n_posts = 1000;
  cfg.seed = 505;
  const SyntheticCorpus c = generate_corpus(cfg);
  std::vector<double> gaps, agreements;
  for (std::size_t i = 0; i < c.comparisons.size(); ++i) {
    gaps.push_back(std::abs(c.truth[i].q_a - c.truth[i].q_b));
    agreements.push_back(comparison_agreement(c.comparisons[i].votes_a, c.comparisons[i].votes_b));
  }
  const double tau = kendall_tau_b(gaps, agreements);
  std::vector<std::size_t> order(gaps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return gaps[l] < gaps[r]; });
  std::vector<double> means;
  for (int b = 0; b < 10; ++b) {
    const std::size_t lo = order.size() * b / 10, hi = order.size() * (b + 1) / 10;
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += agreements[order[k]];
    means.push_back(s / static_cast<double>(hi - lo));
  }
  int inversions = 0;
  double worst_drop = 0.0;
  for (int b = 1; b < 10; ++b) {
    if (means[b] < means[b - 1]) {
      ++inversions;
      worst_drop = std::max(worst_drop, means[b - 1] - means[b]);
    }
  }
  return {c.comparisons.size() >= 10000 && tau > 0.5 && inversions <= 1 && worst_drop <= 0.01,
          std::to_string(c.comparisons.size()) + " comparisons, tau = " + fmt("%.4f", tau) + ", " +
              std::to_string(inversions) + " inversions across 10 |dq| deciles (agreement " +
              fmt("%.3f", means.front()) + " -> " + fmt("%.3f", means.back()) + ")"};
}

Outcome accuracy_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  const Strategy order[] = {Strategy::kMax, Strategy::kMin, Strategy::kDist, Strategy::kRand};
  std::map<Strategy, std::vector<double>> acc;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SplitCorpus data(1000, seed);
    const ContextIndex contexts(data.corpus.posts);
    for (Strategy s : order) {
      TrainConfig tc;
      tc.seed = seed;
      const TrainResult r =
          train(expand_to_examples(data.curated(s, seed)), tc, FeaturizerConfig{}, contexts);
      acc[s].push_back(accuracy(r.model, data.test, contexts).accuracy);
    }
  }
  std::map<Strategy, double> med;
  for (Strategy s : order) med[s] = median(acc[s]);
  const double others = std::min({med[Strategy::kDist], med[Strategy::kRand], med[Strategy::kMax]});
  const bool gap = med[Strategy::kMin] + 0.03 <= others;
  int above_dist = 0;
  for (Strategy s : order) above_dist += s != Strategy::kDist && med[s] > med[Strategy::kDist];
  const bool dist_top_two = above_dist <= 1;
  const double secs = seconds_since(t0);
  std::string detail = "median acc";
  for (Strategy s : order) detail += " " + std::string(to_string(s)) + " " + fmt("%.4f", med[s]);
  detail += std::string("; min gap ") + (gap ? "holds" : "fails") + ", dist rank " +
            std::to_string(above_dist + 1) + "; " + fmt("%.0f", secs) + " s";
  return {gap && dist_top_two && secs < 600.0, detail};
}

Outcome sampling_order() {
  Rng rng(707);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t size = 10 + rng.below(2000);
    std::vector<AgreementRecord> pool;
    for (std::size_t i = 0; i < size; ++i) {
      const int m = 1 + static_cast<int>(rng.below(22));
      const int a = static_cast<int>(rng.below(m + 1));
      pool.push_back(agreement_record({"r" + std::to_string(i), "p", "a", "b", a, m - a, "", ""}));
    }
    std::map<std::string, double> agr;
    for (const AgreementRecord& r : pool) agr[r.comparison_id] = r.agreement;
    const auto mean = [&](const std::vector<std::string>& ids) {
      double s = 0.0;
      for (const std::string& id : ids) s += agr.at(id);
      return s / static_cast<double>(ids.size());
    };
    const std::size_t n = 1 + rng.below(size / 2);
    const double mx = mean(sample_max(pool, n));
    const double rd = mean(sample_rand(pool, n, trial));
    const double mn = mean(sample_min(pool, n));
    violations += !(mx >= rd && rd >= mn);
  }
  return {violations == 0, std::to_string(100 - violations) + "/100 random pools ordered MAX >= RAND >= MIN"};
}

Outcome rlhf_improvement() {
  const auto t0 = std::chrono::steady_clock::now();
  SynthConfig cfg;
  cfg.n_posts = 40;
  cfg.seed = 808;
  const SyntheticCorpus corpus = generate_corpus(cfg);
  std::vector<Document> docs;
  std::size_t max_sentences = 0;
  for (const Post& p : corpus.posts) {
    docs.push_back(make_document(p));
    max_sentences = std::max(max_sentences, docs.back().sentences.size());
  }
  const QualityOracle oracle = cfg.oracle;
  const ExtractiveEnv env(docs, 3, [oracle](std::string_view s, std::string_view y) {
    return oracle_score(oracle, s, y);
  });
  double optimum = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) optimum += optimal_reward(env, d);
  optimum /= static_cast<double>(docs.size());

  std::vector<double> finals;
  double max_kl = 0.0;
  PPOConfig pc;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    pc.seed = seed;
    pc.updates = 200;
    const RlhfResult r = train_rlhf(Policy(), env, pc, corpus.references);
    finals.push_back(r.curve.back().mean_reward);
    for (const RlhfPoint& p : r.curve) max_kl = std::max(max_kl, p.kl);
  }
  const double ratio = median(finals) / optimum;
  const double secs = seconds_since(t0);
  return {max_sentences <= 8 && ratio >= 0.9 && max_kl <= 2 * pc.kl_target && secs < 300.0,
          "S <= " + std::to_string(max_sentences) + ", k = 3, median final reward " + fmt("%.4f", median(finals)) +
              " = " + fmt("%.1f", 100 * ratio) + "% of optimum " + fmt("%.4f", optimum) + ", max KL " +
              fmt("%.4f", max_kl) + " (bound " + fmt("%.2f", 2 * pc.kl_target) + "), " + fmt("%.0f", secs) + " s"};
}

Outcome rlhf_trend() {
  std::vector<double> min_r1, dist_r1;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SplitCorpus data(1000, seed);
    const ContextIndex contexts(data.corpus.posts);
    std::vector<Document> docs;
    for (const Post& p : data.corpus.posts) {
      if (docs.size() == 50) break;
      Document d = make_document(p);
      if (d.sentences.size() >= 2) docs.push_back(std::move(d));
    }
    for (Strategy s : {Strategy::kMin, Strategy::kDist}) {
      TrainConfig tc;
      tc.seed = seed;
      const TrainResult rm = train(expand_to_examples(data.curated(s, seed)), tc, FeaturizerConfig{}, contexts);
      const ExtractiveEnv env(docs, 2, scorer_for(rm.model));
      PPOConfig pc;
      pc.seed = seed;
      const RlhfResult r = train_rlhf(Policy(env.feature_count()), env, pc, data.corpus.references);
      (s == Strategy::kMin ? min_r1 : dist_r1).push_back(r.curve.back().rouge1_f1);
    }
  }
  std::string detail = "median ROUGE-1 F1 min " + fmt("%.4f", median(min_r1)) + " vs dist " +
                       fmt("%.4f", median(dist_r1)) + " (per seed min/dist:";
  for (std::size_t i = 0; i < min_r1.size(); ++i) detail += " " + fmt("%.3f", min_r1[i]) + "/" + fmt("%.3f", dist_r1[i]);
  detail += ")";
  return {median(min_r1) < median(dist_r1), detail};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("agreerm_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  SynthConfig sc;
  sc.n_posts = 300;
  sc.seed = 1010;
  const SyntheticCorpus corpus = generate_corpus(sc);
  {
    std::ofstream c(root / "comparisons.jsonl"), p(root / "posts.jsonl"), r(root / "references.jsonl"),
        q(root / "quality.jsonl");
    write_comparisons(c, corpus.comparisons);
    write_posts(p, corpus.posts);
    write_references(r, corpus.references);
    write_quality_annotations(q, generate_quality_annotations(sc.oracle, 20, 4, 1010));
  }
  const nlohmann::json cfg = {{"comparisons", "comparisons.jsonl"},
                              {"posts", "posts.jsonl"},
                              {"references", "references.jsonl"},
                              {"quality", "quality.jsonl"},
                              {"output_dir", "run"},
                              {"seed", 42},
                              {"test_n", 500},
                              {"strategies", nlohmann::json::array({{{"strategy", "max"}, {"n", 1000}},
                                                                    {{"strategy", "min"}, {"n", 1000}},
                                                                    {{"strategy", "dist"}, {"n", 1000}},
                                                                    {{"strategy", "rand"}, {"n", 1000}}})},
                              {"ppo", {{"updates", 20}}},
                              {"rlhf", {{"documents", 20}}}};
  std::ofstream(root / "config.json") << cfg.dump(2);

  std::vector<std::map<std::string, std::string>> runs;
  bool all_ok = true;
  for (const char* dir : {"run_a", "run_b"}) {
    const ExperimentConfig ec = ExperimentConfig::load((root / "config.json").string(), {{"output_dir", dir}});
    all_ok = all_ok && run_matrix(ec).ok();
    std::map<std::string, std::string> csvs;
    for (const auto& entry : fs::recursive_directory_iterator(root / dir)) {
      if (entry.path().extension() != ".csv") continue;
      std::ifstream in(entry.path(), std::ios::binary);
      std::ostringstream s;
      s << in.rdbuf();
      csvs[fs::relative(entry.path(), root / dir).string()] = s.str();
    }
    runs.push_back(std::move(csvs));
  }
  fs::remove_all(root);
  std::size_t differing = 0;
  for (const auto& [name, text] : runs[0]) differing += !runs[1].count(name) || runs[1].at(name) != text;
  differing += runs[0].size() != runs[1].size();
  return {all_ok && differing == 0 && runs[0].size() >= 12,
          std::to_string(runs[0].size()) + " CSV files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "loss identity at zero parameters", loss_identity},
      {2, "gradient oracle (reward model and policy surrogate)", gradient_oracle},
      {3, "agreement arithmetic", agreement_arithmetic},
      {4, "metric oracles (kendall, lcs, rouge)", metric_oracles},
      {5, "quality-differential thesis on synthetic data", quality_thesis},
      {6, "held-out accuracy trend across curation strategies", accuracy_trend},
      {7, "sampling ordering invariant", sampling_order},
      {8, "RLHF improvement on the oracle-rewarded environment", rlhf_improvement},
      {9, "RLHF ROUGE-1 trend, MIN vs DIST reward models", rlhf_trend},
      {10, "run-matrix determinism", determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
