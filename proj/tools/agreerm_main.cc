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

// agreerm command-line tool. Run `agreerm --help` or `agreerm <command>
// --help` for flags.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "agreerm/agreement.h"
#include "agreerm/corpus.h"
#include "agreerm/error.h"
#include "agreerm/eval.h"
#include "agreerm/experiment.h"
#include "agreerm/plots.h"
#include "agreerm/reward.h"
#include "agreerm/rlhf.h"
#include "agreerm/sampler.h"
#include "agreerm/synth.h"
#include "agreerm/text.h"
#include "agreerm/version.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace agreerm;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

Provenance provenance_for(const json& options, const std::string& corpus, std::uint64_t seed) {
  return {hex64(fingerprint64(options.dump())), corpus, seed};
}

std::string provenance_json_line(const Provenance& p) {
  return json{{"provenance", p.to_json()}}.dump() + "\n";
}

std::string csv_header(const Provenance& p) { return "# " + p.line() + "\n"; }

struct CorpusOptions {
  std::string comparisons;
  std::string format = "canonical";
  std::string posts;

  void add(CLI::App* app, bool with_posts) {
    app->add_option("--comparisons", comparisons, "Comparison file (JSONL)")->required();
    app->add_option("--format", format, "canonical or tldr-openai")
        ->check(CLI::IsMember({"canonical", "tldr-openai"}));
    if (with_posts) app->add_option("--posts", posts, "Posts file (JSONL) for canonical input");
  }

  ComparisonSet load(std::vector<Post>* posts_out = nullptr) const {
    ComparisonSet set = load_comparisons(comparisons, parse_comparison_format(format));
    if (set.report.malformed > 0) {
      std::cerr << "agreerm: skipped " << set.report.malformed << " malformed line(s)\n";
      for (const std::string& d : set.report.diagnostics) std::cerr << "  " << d << '\n';
    }
    if (posts_out) {
      *posts_out = set.posts;
      if (!posts.empty()) {
        std::unordered_set<std::string> seen;
        for (const Post& p : *posts_out) seen.insert(p.id);
        for (Post& p : load_posts(posts)) {
          if (seen.insert(p.id).second) posts_out->push_back(std::move(p));
        }
      }
    }
    return set;
  }

  json to_json() const { return {{"comparisons", comparisons}, {"format", format}, {"posts", posts}}; }
};

std::vector<Comparison> select_ids(const std::vector<Comparison>& all,
                                   const std::vector<std::string>& ids) {
  std::unordered_map<std::string, const Comparison*> by_id;
  for (const Comparison& c : all) by_id.emplace(c.id, &c);
  std::vector<Comparison> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw Error("manifest id '" + id + "' is not in the comparison file");
    out.push_back(*it->second);
  }
  return out;
}

// ---------------------------------------------------------------- ingest

struct IngestCmd {
  CorpusOptions corpus;
  std::string output;
  std::string posts_output;
  bool multi_only = false;

  void attach(CLI::App& root) {
    CLI::App* app = root.add_subcommand("ingest", "Load a comparison file and write canonical JSONL");
    corpus.add(app, false);
    app->add_option("--output", output, "Canonical comparison JSONL")->required();
    app->add_option("--posts-output", posts_output, "Posts JSONL (formats that embed posts)");
    app->add_flag("--multi-annotated-only", multi_only, "Keep comparisons with >= 2 judgements");
    app->callback([this] { run(); });
  }

  void run() {
    std::vector<Post> posts;
    ComparisonSet set = corpus.load(&posts);
    std::vector<Comparison> items = set.comparisons;
    if (multi_only) items = filter_multi_annotated(items);
    json opts = corpus.to_json();
    opts["multi_annotated_only"] = multi_only;
    const Provenance prov = provenance_for(opts, corpus_hash(items), 0);
    {
      std::ofstream out = open_output(output);
      out << provenance_json_line(prov);
      write_comparisons(out, items);
    }
    if (!posts_output.empty()) {
      std::ofstream out = open_output(posts_output);
      out << provenance_json_line(prov);
      write_posts(out, posts);
    }
    std::cout << "lines " << set.report.lines << ", malformed " << set.report.malformed
              << ", judgements " << set.report.judgements << ", comparisons " << items.size()
              << ", posts " << posts.size() << '\n';
  }
};

// ---------------------------------------------------------------- stats

struct StatsCmd {
  CorpusOptions corpus;
  std::string output;
  std::string histogram;
  int bins = kDefaultAgreementBins;

  void attach(CLI::App& root) {
    CLI::App* app = root.add_subcommand("stats", "Per-comparison agreement and histogram");
    corpus.add(app, false);
    app->add_option("--output", output, "Per-comparison CSV")->required();
    app->add_option("--histogram", histogram, "Histogram CSV");
    app->add_option("--bins", bins, "Agreement bins over [0.5, 1]")->check(CLI::PositiveNumber);
    app->callback([this] { run(); });
  }

  void run() {
    const ComparisonSet set = corpus.load();
    const std::vector<AgreementRecord> records = agreement_records(set.comparisons);
    const CorpusStatistics stats = corpus_statistics(records, bins);
    json opts = corpus.to_json();
    opts["bins"] = bins;
    const Provenance prov = provenance_for(opts, corpus_hash(set.comparisons), 0);
    {
      std::ofstream out = open_output(output);
      out << csv_header(prov) << "comparison_id,agreement,repetitions,pairwise_agreement\n";
      for (const AgreementRecord& r : records) {
        out << r.comparison_id << ',' << fmt(r.agreement) << ',' << r.repetitions << ','
            << (r.pairwise_agreement ? fmt(*r.pairwise_agreement) : "") << '\n';
      }
    }
    if (!histogram.empty()) {
      std::ofstream out = open_output(histogram);
      out << csv_header(prov) << "lower,upper,count\n";
      for (const HistogramBin& b : stats.agreement_histogram) {
        out << fmt(b.lower) << ',' << fmt(b.upper) << ',' << b.count << '\n';
      }
    }
    std::cout << "comparisons " << stats.records << "\nmean_agreement " << fmt(stats.mean_agreement)
              << '\n';
    if (stats.mean_pairwise_agreement) {
      std::cout << "mean_pairwise_agreement " << fmt(*stats.mean_pairwise_agreement) << " over "
                << stats.pairwise_defined << " comparisons\n";
    }
    for (const auto& [reps, count] : stats.repetition_histogram) {
      std::cout << "repetitions " << reps << ": " << count << '\n';
    }
  }
};

// ---------------------------------------------------------------- sample

struct SampleCmd {
  CorpusOptions corpus;
  std::string strategy;
  std::size_t n = kDefaultSampleSize;
  int bins = kDefaultAgreementBins;
  std::uint64_t seed = 0;
  std::size_t test_n = kDefaultTestSize;
  std::string output;
  std::string test_output;

  void attach(CLI::App& root) {
    CLI::App* app = root.add_subcommand("sample", "Curate a training subset by agreement");
    corpus.add(app, false);
    app->add_option("--strategy", strategy, "max, min, dist or rand")
        ->required()
        ->check(CLI::IsMember({"max", "min", "dist", "rand"}));
    app->add_option("--n", n, "Sample size");
    app->add_option("--bins", bins, "Agreement bins (dist)")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Random seed")->required();
    app->add_option("--test-n", test_n, "Held-out comparisons removed first (0 for none)");
    app->add_option("--output", output, "Manifest JSONL")->required();
    app->add_option("--test-output", test_output, "Manifest JSONL of the held-out ids");
    app->callback([this] { run(); });
  }

  void run() {
    const ComparisonSet set = corpus.load();
    std::vector<std::string> ids;
    for (const Comparison& c : set.comparisons) ids.push_back(c.id);
    DatasetSplit split{ids, {}};
    if (test_n > 0) split = holdout_split(ids, test_n, seed);
    const std::vector<Comparison> train_items = select_ids(set.comparisons, split.train_ids);
    const std::vector<AgreementRecord> pool = agreement_records(train_items);

    SamplingSpec spec{parse_strategy(strategy), n, bins, seed};
    const std::vector<std::string> chosen = sample(pool, spec);

    json opts = corpus.to_json();
    opts.update({{"strategy", strategy}, {"n", n}, {"bins", bins}, {"test_n", test_n}});
    const Provenance prov = provenance_for(opts, corpus_hash(set.comparisons), seed);
    const json extra = {{"strategy", strategy}, {"n", n}, {"bins", bins}, {"test_n", test_n}};
    {
      std::ofstream out = open_output(output);
      write_manifest(out, prov, chosen, pool, extra);
    }
    if (!test_output.empty()) {
      const std::vector<AgreementRecord> test_pool =
          agreement_records(select_ids(set.comparisons, split.test_ids));
      std::ofstream out = open_output(test_output);
      json test_extra = extra;
      test_extra["split"] = "test";
      write_manifest(out, prov, split.test_ids, test_pool, test_extra);
    }
    double mean = 0.0;
    std::unordered_map<std::string, double> agreement_of;
    for (const AgreementRecord& r : pool) agreement_of.emplace(r.comparison_id, r.agreement);
    for (const std::string& id : chosen) mean += agreement_of.at(id);
    std::cout << strategy << ": " << chosen.size() << " of " << pool.size()
              << " pool comparisons, mean agreement " << fmt(mean / chosen.size()) << '\n';
  }
};

// ---------------------------------------------------------------- synth

struct SynthCmd {
  SynthConfig config;
  std::string output_dir;
  std::size_t quality_posts = 50;
  std::size_t quality_per_post = 8;

  void attach(CLI::App& root) {
    CLI::App* app = root.add_subcommand("synth", "Generate a synthetic corpus with known quality");
    app->add_option("--output-dir", output_dir, "Directory for the JSONL files")->required();
    app->add_option("--seed", config.seed, "Random seed")->required();
    app->add_option("--posts", config.n_posts, "Number of posts");
    app->add_option("--candidates", config.candidates_per_post, "Candidate summaries per post");
    app->add_option("--min-sentences", config.min_sentences, "Shortest post");
    app->add_option("--max-sentences", config.max_sentences, "Longest post");
    app->add_option("--reference-sentences", config.reference_sentences, "Reference length");
    app->add_option("--beta", config.annotator.beta, "Annotator sharpness");
    app->add_option("--annotators", config.annotator.annotators_per_comparison,
                    "Votes per comparison");
    app->add_option("--keyword-weight", config.oracle.keyword_weight, "Oracle keyword weight");
    app->add_option("--length-weight", config.oracle.length_weight, "Oracle length weight");
    app->add_option("--repetition-weight", config.oracle.repetition_weight,
                    "Oracle repetition weight");
    app->add_option("--target-length", config.oracle.target_length, "Oracle target length");
    app->add_option("--quality-posts", quality_posts, "Posts in quality.jsonl (0 to skip)");
    app->add_option("--quality-per-post", quality_per_post, "Rated summaries per post");
    app->callback([this] { run(); });
  }

  void run() {
    const SyntheticCorpus corpus = generate_corpus(config);
    const json opts = {{"posts", config.n_posts},
                       {"candidates", config.candidates_per_post},
                       {"min_sentences", config.min_sentences},
                       {"max_sentences", config.max_sentences},
                       {"reference_sentences", config.reference_sentences},
                       {"beta", config.annotator.beta},
                       {"annotators", config.annotator.annotators_per_comparison},
                       {"keyword_weight", config.oracle.keyword_weight},
                       {"length_weight", config.oracle.length_weight},
                       {"repetition_weight", config.oracle.repetition_weight},
                       {"target_length", config.oracle.target_length},
                       {"quality_posts", quality_posts},
                       {"quality_per_post", quality_per_post}};
    const Provenance prov = provenance_for(opts, corpus_hash(corpus.comparisons), config.seed);
    const fs::path dir(output_dir);
    const std::string head = provenance_json_line(prov);
    {
      std::ofstream out = open_output((dir / "posts.jsonl").string());
      out << head;
      write_posts(out, corpus.posts);
    }
    {
      std::ofstream out = open_output((dir / "comparisons.jsonl").string());
      out << head;
      write_comparisons(out, corpus.comparisons);
    }
    {
      std::ofstream out = open_output((dir / "references.jsonl").string());
      out << head;
      write_references(out, corpus.references);
    }
    {
      std::ofstream out = open_output((dir / "truth.jsonl").string());
      out << head;
      write_ground_truth(out, corpus.truth);
    }
    if (quality_posts > 0) {
      const auto quality = generate_quality_annotations(config.oracle, quality_posts,
                                                        quality_per_post, config.seed);
      std::ofstream out = open_output((dir / "quality.jsonl").string());
      out << head;
      write_quality_annotations(out, quality);
    }
    std::cout << corpus.posts.size() << " posts, " << corpus.comparisons.size()
              << " comparisons written to " << output_dir << '\n';
  }
};

// ---------------------------------------------------------------- train-rm

struct TrainCmd {
  CorpusOptions corpus;
  std::string manifest;
  std::string test_manifest;
  TrainConfig train;
  FeaturizerConfig featurizer;
  std::string output;
  std::string curve;

  void attach(CLI::App& root) {
    CLI::App* app = root.add_subcommand("train-rm", "Train a pairwise reward model");
    corpus.add(app, true);
    app->add_option("--manifest", manifest, "Training ids (default: every comparison not in the test manifest)");
    app->add_option("--test-manifest", test_manifest, "Held-out ids for the accuracy curve");
    app->add_option("--seed", train.seed, "Shuffle seed")->required();
    app->add_option("--learning-rate", train.learning_rate, "SGD step size");
    app->add_option("--epochs", train.epochs, "Passes over the data");
    app->add_option("--batch-size", train.batch_size, "Examples per step");
    app->add_option("--l2-penalty", train.l2_penalty, "L2 coefficient");
    app->add_option("--eval-every", train.eval_every, "Steps between curve points");
    app->add_option("--hidden-units", train.hidden_units, "0 for the linear model");
    app->add_option("--dimension", featurizer.dimension, "Hashed feature dimension (power of two)");
    app->add_option("--hash-seed", featurizer.hash_seed, "Feature hash seed");
    app->add_flag("--context-conditioning", featurizer.context_conditioning,
                  "Add context x summary unigram pairs");
    app->add_option("--output", output, "Checkpoint path")->required();
    app->add_option("--curve", curve, "Learning curve CSV");
    app->callback([this] { run(); });
  }

  void run() {
    std::vector<Post> posts;
    const ComparisonSet set = corpus.load(&posts);
    const ContextIndex contexts(posts);
    std::vector<Comparison> test;
    std::unordered_set<std::string> held_out;
    if (!test_manifest.empty()) {
      const std::vector<std::string> ids = read_manifest(test_manifest);
      held_out.insert(ids.begin(), ids.end());
      test = select_ids(set.comparisons, ids);
    }
    std::vector<Comparison> items;
    if (!manifest.empty()) {
      items = select_ids(set.comparisons, read_manifest(manifest));
    } else {
      for (const Comparison& c : set.comparisons) {
        if (!held_out.count(c.id)) items.push_back(c);
      }
    }
    const std::vector<PreferenceExample> examples = expand_to_examples(items);
    TrainResult result = agreerm::train(examples, train, featurizer, contexts, test);

    json opts = corpus.to_json();
    opts.update({{"manifest", manifest},
                 {"test_manifest", test_manifest},
                 {"train", train.to_json()},
                 {"featurizer", featurizer.to_json()}});
    const Provenance prov = provenance_for(opts, corpus_hash(set.comparisons), train.seed);
    result.model.train_meta = {{"provenance", prov.to_json()},
                               {"train_config", train.to_json()},
                               {"examples", examples.size()}};
    if (!test.empty()) {
      const AccuracyResult acc = accuracy(result.model, test, contexts);
      result.model.train_meta["test_accuracy"] = acc.accuracy;
      std::cout << "test accuracy " << fmt(acc.accuracy) << " over " << acc.decidable
                << " decidable comparisons (" << acc.vote_ties << " vote ties)\n";
    }
    const fs::path out_path(output);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    save_model(output, result.model);
    if (!curve.empty()) {
      std::ofstream out = open_output(curve);
      out << csv_header(prov);
      write_learning_curve(out, result.curve);
    }
    std::cout << "trained on " << examples.size() << " examples from " << items.size()
              << " comparisons; final train loss "
              << fmt(result.curve.empty() ? 0.0 : result.curve.back().train_loss) << '\n';
  }
};

// ---------------------------------------------------------------- eval-rm

struct EvalCmd {
  CorpusOptions corpus;
  std::string model;
  std::string manifest;

  void attach(CLI::App& root) {
    CLI::App* app = root.add_subcommand("eval-rm", "Held-out accuracy of a reward model");
    corpus.add(app, true);
    app->add_option("--model", model, "Checkpoint")->required();
    app->add_option("--manifest", manifest, "Ids to evaluate (default: all)");
    app->callback([this] { run(); });
  }

  void run() {
    std::vector<Post> posts;
    const ComparisonSet set = corpus.load(&posts);
    const ContextIndex contexts(posts);
    const std::vector<Comparison> items =
        manifest.empty() ? set.comparisons : select_ids(set.comparisons, read_manifest(manifest));
    const RewardModel rm = load_model(model);
    const AccuracyResult acc = accuracy(rm, items, contexts);
    std::cout << "accuracy " << fmt(acc.accuracy) << "\ndecidable " << acc.decidable
              << "\nvote_ties " << acc.vote_ties << '\n';
  }
};

// ---------------------------------------------------------------- correlate

struct CorrelateCmd {
  std::vector<std::string> models;
  std::string quality;
  std::string output;
  bool no_rouge = false;

  void attach(CLI::App& root) {
    CLI::App* app = root.add_subcommand("correlate", "Kendall tau of scores against quality ratings");
    app->add_option("--model", models, "Checkpoint (repeatable)");
    app->add_option("--quality", quality, "Quality annotations JSONL")->required();
    app->add_option("--output", output, "Correlation CSV")->required();
    app->add_flag("--no-rouge", no_rouge, "Omit the ROUGE baseline rows");
    app->callback([this] { run(); });
  }

  void run() {
    const QualityLoadResult q = load_quality_annotations(quality);
    if (!q.rejected.empty()) {
      std::cerr << "agreerm: rejected " << q.rejected.size() << " quality record(s)\n";
      for (const std::string& r : q.rejected) std::cerr << "  " << r << '\n';
    }
    std::vector<CorrelationRow> rows;
    for (const std::string& path : models) {
      const RewardModel rm = load_model(path);
      const auto more = correlation_rows(fs::path(path).stem().string(), scorer_for(rm), q.records);
      rows.insert(rows.end(), more.begin(), more.end());
    }
    if (!no_rouge) {
      const auto base = rouge_baseline_rows(q.records);
      if (base.empty()) std::cerr << "agreerm: no references, ROUGE rows omitted\n";
      rows.insert(rows.end(), base.begin(), base.end());
    }
    if (rows.empty()) throw Error("nothing to correlate: give --model or keep the ROUGE rows");
    std::string hash_input;
    for (const QualityAnnotatedSummary& r : q.records) hash_input += r.id + '\n' + r.summary + '\n';
    const Provenance prov = provenance_for({{"models", models}, {"quality", quality}},
                                           hex64(fingerprint64(hash_input)), 0);
    std::ofstream out = open_output(output);
    write_correlation_csv(out, prov, rows);
  }
};

// ---------------------------------------------------------------- rlhf

struct RlhfCmd {
  std::string checkpoint;
  bool oracle = false;
  std::string posts;
  std::string references;
  PPOConfig ppo;
  std::size_t k = 2;
  std::size_t documents = 50;
  double length_penalty = 0.0;
  int target_length = 20;
  std::size_t keyword_count = 5;
  std::string output;

  void attach(CLI::App& root) {
    CLI::App* app = root.add_subcommand("rlhf", "Optimize an extractive policy against a reward model");
    auto* ck = app->add_option("--rm-checkpoint", checkpoint, "Reward model checkpoint");
    auto* orc = app->add_flag("--oracle", oracle, "Use the synthetic quality oracle as reward");
    ck->excludes(orc);
    app->add_option("--posts", posts, "Posts JSONL")->required();
    app->add_option("--references", references, "Reference summaries JSONL");
    app->add_option("--updates", ppo.updates, "PPO updates");
    app->add_option("--seed", ppo.seed, "Rollout seed")->required();
    app->add_option("--clip-epsilon", ppo.clip_epsilon, "Ratio clip range");
    app->add_option("--kl-coef", ppo.kl_coef, "KL penalty coefficient");
    app->add_option("--kl-target", ppo.kl_target, "KL target; updates stop beyond twice this");
    app->add_option("--learning-rate", ppo.learning_rate, "Policy step size");
    app->add_option("--rollouts-per-update", ppo.rollouts_per_update, "Episodes per update");
    app->add_option("--epochs-per-update", ppo.epochs_per_update, "Surrogate passes per update");
    app->add_option("--k", k, "Sentences per summary");
    app->add_option("--documents", documents, "Posts used as environments");
    app->add_option("--length-penalty", length_penalty, "Reward penalty per token");
    app->add_option("--target-length", target_length, "Length-fit feature target");
    app->add_option("--keyword-count", keyword_count, "Keywords per document");
    app->add_option("--output", output, "Curve CSV")->required();
    app->callback([this] { run(); });
  }

  void run() {
    if (checkpoint.empty() && !oracle) throw Error("give --rm-checkpoint or --oracle");
    std::vector<Document> docs;
    std::string hash_input;
    for (const Post& p : load_posts(posts)) {
      if (docs.size() >= documents) break;
      Document d = make_document(p, keyword_count);
      if (d.sentences.size() < k) continue;
      hash_input += p.id + '\n';
      docs.push_back(std::move(d));
    }
    if (docs.empty()) throw Error("no post has at least k sentences");
    std::vector<ReferencePair> refs;
    if (!references.empty()) refs = load_references(references);

    std::optional<RewardModel> rm;
    SummaryScorer scorer;
    if (oracle) {
      const QualityOracle o;
      scorer = [o](std::string_view s, std::string_view y) { return oracle_score(o, s, y); };
    } else {
      rm.emplace(load_model(checkpoint));
      scorer = scorer_for(*rm);
    }
    const ExtractiveEnv env(std::move(docs), k, scorer, length_penalty, target_length);
    const RlhfResult result = train_rlhf(Policy(env.feature_count()), env, ppo, refs);

    const json opts = {{"rm_checkpoint", checkpoint}, {"oracle", oracle},
                       {"posts", posts},              {"references", references},
                       {"ppo", ppo.to_json()},        {"k", k},
                       {"documents", documents},      {"length_penalty", length_penalty},
                       {"target_length", target_length}, {"keyword_count", keyword_count}};
    const Provenance prov = provenance_for(opts, hex64(fingerprint64(hash_input)), ppo.seed);
    std::ofstream out = open_output(output);
    out << csv_header(prov);
    write_rlhf_curve(out, result.curve);
    const RlhfPoint& first = result.curve.front();
    const RlhfPoint& last = result.curve.back();
    std::cout << "mean reward " << fmt(first.mean_reward) << " -> " << fmt(last.mean_reward)
              << ", rouge1 " << fmt(first.rouge1_f1) << " -> " << fmt(last.rouge1_f1) << '\n';
  }
};

// ---------------------------------------------------------------- run-matrix

struct MatrixCmd {
  std::string config;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::vector<std::string> strategies;
  bool parallel = false;
  std::size_t updates = 0;
  CLI::Option* updates_opt = nullptr;

  void attach(CLI::App& root, int& exit_code) {
    CLI::App* app = root.add_subcommand("run-matrix", "Run every curation lane end to end");
    app->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Global seed (overrides the config)")->required();
    app->add_option("--output-dir", output_dir, "Overrides the config output_dir");
    app->add_option("--strategies", strategies, "Subset of lanes, e.g. --strategies max dist")
        ->check(CLI::IsMember({"max", "min", "dist", "rand"}));
    app->add_flag("--parallel", parallel, "Run lanes on worker threads");
    updates_opt = app->add_option("--updates", updates, "Overrides ppo.updates");
    app->callback([this, &exit_code] { exit_code = run(); });
  }

  int run() {
    json overrides = {{"seed", seed}};
    if (!output_dir.empty()) overrides["output_dir"] = fs::absolute(output_dir).string();
    if (parallel) overrides["parallel"] = true;
    if (updates_opt->count() > 0) overrides["ppo"] = {{"updates", updates}};
    ExperimentConfig cfg = ExperimentConfig::load(config, overrides);
    if (!strategies.empty()) {
      // Keep the config's spec for each named lane; unlisted ones get defaults.
      std::vector<SamplingSpec> picked;
      for (const std::string& name : strategies) {
        const Strategy s = parse_strategy(name);
        const auto it = std::find_if(cfg.strategies.begin(), cfg.strategies.end(),
                                     [s](const SamplingSpec& spec) { return spec.strategy == s; });
        SamplingSpec spec;
        spec.strategy = s;
        spec.seed = cfg.seed;
        picked.push_back(it != cfg.strategies.end() ? *it : spec);
      }
      cfg.strategies = std::move(picked);
      cfg.validate();
    }
    const MatrixReport report = run_matrix(cfg);
    for (const LaneReport& lane : report.lanes) {
      if (lane.ok) {
        std::cout << to_string(lane.strategy) << ": ok, test accuracy " << fmt(lane.final_accuracy)
                  << '\n';
      } else {
        std::cout << to_string(lane.strategy) << ": FAILED: " << lane.error << '\n';
      }
    }
    std::cout << "outputs in " << cfg.output_dir << " (" << report.provenance.line() << ")\n";
    return report.ok() ? 0 : 2;
  }
};

// ---------------------------------------------------------------- render

struct RenderCmd {
  std::string report_dir;
  std::string output_dir;

  void attach(CLI::App& root) {
    CLI::App* app = root.add_subcommand("render", "Draw SVG charts from run-matrix CSVs");
    app->add_option("--report-dir", report_dir, "run-matrix output directory")->required();
    app->add_option("--output-dir", output_dir, "Where to write SVGs (default: report dir)");
    app->callback([this] { run(); });
  }

  void run() {
    for (const std::string& path : render_plots(report_dir, output_dir)) std::cout << path << '\n';
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agreerm: agreement-curated preference data, reward models and RLHF"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  int exit_code = 0;

  IngestCmd ingest;
  StatsCmd stats;
  SampleCmd sample_cmd;
  SynthCmd synth;
  TrainCmd train_cmd;
  EvalCmd eval;
  CorrelateCmd correlate;
  RlhfCmd rlhf;
  MatrixCmd matrix;
  RenderCmd render;
  ingest.attach(app);
  stats.attach(app);
  sample_cmd.attach(app);
  synth.attach(app);
  train_cmd.attach(app);
  eval.attach(app);
  correlate.attach(app);
  rlhf.attach(app);
  matrix.attach(app, exit_code);
  render.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "agreerm: error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
