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

#include "agreerm/experiment.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "agreerm/agreement.h"
#include "agreerm/error.h"
#include "agreerm/eval.h"
#include "agreerm/text.h"
#include "agreerm/version.h"

namespace agreerm {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void require_path(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw Error(std::string(what) + " '" + path + "' does not exist");
}

// Merge a nested config object with the global seed when it has none.
json with_seed(const json& j, const char* key, std::uint64_t seed) {
  json out = j.contains(key) ? j.at(key) : json::object();
  if (!out.is_object()) throw Error(std::string("config field '") + key + "' must be an object");
  if (!out.contains("seed")) out["seed"] = seed;
  return out;
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

struct Inputs {
  std::vector<Comparison> comparisons;
  std::vector<Post> posts;
  ContextIndex contexts;
  std::vector<Comparison> test;
  std::vector<AgreementRecord> pool;
  std::unordered_map<std::string, std::size_t> index;  // comparison id -> position
  std::vector<ReferencePair> references;
  std::vector<QualityAnnotatedSummary> quality;
  std::vector<Document> documents;
};

struct LaneOutput {
  LaneReport report;
  std::vector<CurvePoint> curve;
  std::vector<CorrelationRow> correlation;
  std::vector<RlhfPoint> rlhf;
};

LaneOutput run_lane(const ExperimentConfig& config, const SamplingSpec& spec,
                    const Inputs& in, const Provenance& prov) {
  LaneOutput lane;
  lane.report.strategy = spec.strategy;
  const std::string name(to_string(spec.strategy));
  const fs::path dir = fs::path(config.output_dir) / name;
  const std::string header = "# " + prov.line() + "\n";
  try {
    fs::create_directories(dir);
    fs::remove(dir / "error.txt");

    const std::vector<std::string> ids = sample(in.pool, spec);
    {
      std::ostringstream out;
      write_manifest(out, prov, ids, in.pool,
                     {{"strategy", name}, {"n", spec.n}, {"bins", spec.bins}, {"sample_seed", spec.seed}});
      write_file(dir / "manifest.jsonl", out.str());
      lane.report.files.push_back(name + "/manifest.jsonl");
    }

    std::vector<Comparison> chosen;
    chosen.reserve(ids.size());
    for (const std::string& id : ids) chosen.push_back(in.comparisons[in.index.at(id)]);
    const std::vector<PreferenceExample> examples = expand_to_examples(chosen);
    TrainResult trained = train(examples, config.reward, config.featurizer, in.contexts, in.test);
    lane.curve = trained.curve;
    lane.report.final_accuracy = accuracy(trained.model, in.test, in.contexts).accuracy;

    RewardModel& model = trained.model;
    model.train_meta = {{"strategy", name},
                        {"provenance", prov.to_json()},
                        {"train_config", config.reward.to_json()},
                        {"examples", examples.size()},
                        {"test_accuracy", lane.report.final_accuracy}};
    save_model((dir / "model.bin").string(), model);
    lane.report.files.push_back(name + "/model.bin");

    {
      std::ostringstream out;
      out << header;
      write_learning_curve(out, trained.curve);
      write_file(dir / "curve.csv", out.str());
      lane.report.files.push_back(name + "/curve.csv");
    }

    if (!in.quality.empty()) {
      lane.correlation = correlation_rows(name, scorer_for(model), in.quality);
      std::ostringstream out;
      write_correlation_csv(out, prov, lane.correlation);
      write_file(dir / "correlation.csv", out.str());
      lane.report.files.push_back(name + "/correlation.csv");
    }

    if (in.documents.empty()) {
      throw Error("no document has at least k = " + std::to_string(config.rlhf_k) +
                  " sentences");
    }
    const ExtractiveEnv env(in.documents, config.rlhf_k, scorer_for(model),
                            config.length_penalty, config.target_length);
    RlhfResult rl = train_rlhf(Policy(env.feature_count()), env, config.ppo, in.references);
    lane.rlhf = std::move(rl.curve);
    {
      std::ostringstream out;
      out << header;
      write_rlhf_curve(out, lane.rlhf);
      write_file(dir / "rlhf_curve.csv", out.str());
      lane.report.files.push_back(name + "/rlhf_curve.csv");
    }
    lane.report.ok = true;
  } catch (const std::exception& e) {
    lane.report.ok = false;
    lane.report.error = e.what();
    try {
      fs::create_directories(dir);
      write_file(dir / "error.txt", header + lane.report.error + "\n");
    } catch (const std::exception&) {
      // The error is still reported through the matrix report.
    }
  }
  return lane;
}

Inputs load_inputs(const ExperimentConfig& config) {
  Inputs in;
  ComparisonSet set = load_comparisons(config.comparisons_path, config.format);
  in.comparisons = std::move(set.comparisons);
  in.posts = std::move(set.posts);
  if (!config.posts_path.empty()) {
    std::unordered_set<std::string> seen;
    for (const Post& p : in.posts) seen.insert(p.id);
    for (Post& p : load_posts(config.posts_path)) {
      if (seen.insert(p.id).second) in.posts.push_back(std::move(p));
    }
  }
  in.contexts = ContextIndex(in.posts);
  for (const Comparison& c : in.comparisons) {
    if (!in.contexts.contains(c.post_id)) {
      throw Error("comparison '" + c.id + "' refers to unknown post '" + c.post_id + "'");
    }
  }

  std::vector<std::string> ids;
  ids.reserve(in.comparisons.size());
  for (std::size_t i = 0; i < in.comparisons.size(); ++i) {
    ids.push_back(in.comparisons[i].id);
    in.index.emplace(in.comparisons[i].id, i);
  }
  const DatasetSplit split = holdout_split(ids, config.test_n, config.seed);
  for (const std::string& id : split.test_ids) in.test.push_back(in.comparisons[in.index.at(id)]);
  for (const std::string& id : split.train_ids) {
    in.pool.push_back(agreement_record(in.comparisons[in.index.at(id)]));
  }

  if (!config.references_path.empty()) in.references = load_references(config.references_path);
  if (!config.quality_path.empty()) {
    in.quality = load_quality_annotations(config.quality_path).records;
  }
  for (const Post& p : in.posts) {
    if (in.documents.size() >= config.rlhf_documents) break;
    Document d = make_document(p, config.keyword_count);
    if (d.sentences.size() >= config.rlhf_k) in.documents.push_back(std::move(d));
  }
  return in;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (comparisons_path.empty()) throw Error("config: comparisons path is required");
  if (output_dir.empty()) throw Error("config: output_dir is required");
  require_path(comparisons_path, "comparisons file");
  if (!posts_path.empty()) require_path(posts_path, "posts file");
  if (!references_path.empty()) require_path(references_path, "references file");
  if (!quality_path.empty()) require_path(quality_path, "quality file");
  if (test_n < 1) throw Error("config: test_n must be >= 1");
  if (strategies.empty()) throw Error("config: at least one strategy is required");
  std::set<Strategy> seen;
  for (const SamplingSpec& s : strategies) {
    s.validate();
    if (!seen.insert(s.strategy).second) {
      throw Error("config: strategy '" + std::string(to_string(s.strategy)) + "' listed twice");
    }
  }
  reward.validate();
  featurizer.validate();
  ppo.validate();
  if (rlhf_k < 1) throw Error("config: rlhf k must be >= 1");
  if (rlhf_documents < 1) throw Error("config: rlhf documents must be >= 1");
  if (!(length_penalty >= 0.0)) throw Error("config: length_penalty must be >= 0");
  if (target_length < 1) throw Error("config: target_length must be >= 1");
  if (keyword_count < 1) throw Error("config: keyword_count must be >= 1");
}

json ExperimentConfig::to_json() const {
  json strat = json::array();
  for (const SamplingSpec& s : strategies) {
    strat.push_back({{"strategy", std::string(to_string(s.strategy))},
                     {"n", s.n},
                     {"bins", s.bins},
                     {"seed", s.seed}});
  }
  return {{"comparisons", comparisons_path},
          {"format", std::string(to_string(format))},
          {"posts", posts_path},
          {"references", references_path},
          {"quality", quality_path},
          {"output_dir", output_dir},
          {"seed", seed},
          {"test_n", test_n},
          {"strategies", strat},
          {"reward", reward.to_json()},
          {"featurizer", featurizer.to_json()},
          {"ppo", ppo.to_json()},
          {"rlhf",
           {{"k", rlhf_k},
            {"documents", rlhf_documents},
            {"length_penalty", length_penalty},
            {"target_length", target_length},
            {"keyword_count", keyword_count}}},
          {"parallel", parallel}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  for (const char* key : {"comparisons", "output_dir", "seed"}) {
    if (!j.contains(key)) throw Error(std::string("config: missing required field '") + key + "'");
  }
  ExperimentConfig c;
  try {
    c.comparisons_path = j.at("comparisons").get<std::string>();
    c.output_dir = j.at("output_dir").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.format = parse_comparison_format(j.value("format", std::string("canonical")));
    c.posts_path = j.value("posts", std::string());
    c.references_path = j.value("references", std::string());
    c.quality_path = j.value("quality", std::string());
    c.test_n = j.value("test_n", c.test_n);
    if (j.contains("strategies")) {
      for (const json& s : j.at("strategies")) {
        SamplingSpec spec;
        if (s.is_string()) {
          spec.strategy = parse_strategy(s.get<std::string>());
          spec.seed = c.seed;
        } else {
          spec.strategy = parse_strategy(s.at("strategy").get<std::string>());
          spec.n = s.value("n", spec.n);
          spec.bins = s.value("bins", spec.bins);
          spec.seed = s.value("seed", c.seed);
        }
        c.strategies.push_back(spec);
      }
    } else {
      for (Strategy s : {Strategy::kMax, Strategy::kMin, Strategy::kDist, Strategy::kRand}) {
        SamplingSpec spec;
        spec.strategy = s;
        spec.seed = c.seed;
        c.strategies.push_back(spec);
      }
    }
    c.reward = TrainConfig::from_json(with_seed(j, "reward", c.seed));
    c.featurizer = FeaturizerConfig::from_json(j.value("featurizer", json::object()));
    c.ppo = PPOConfig::from_json(with_seed(j, "ppo", c.seed));
    const json rl = j.value("rlhf", json::object());
    c.rlhf_k = rl.value("k", c.rlhf_k);
    c.rlhf_documents = rl.value("documents", c.rlhf_documents);
    c.length_penalty = rl.value("length_penalty", c.length_penalty);
    c.target_length = rl.value("target_length", c.target_length);
    c.keyword_count = rl.value("keyword_count", c.keyword_count);
    c.parallel = j.value("parallel", c.parallel);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path, const json& overrides) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("config '" + path + "': " + e.what());
  }
  j.merge_patch(overrides);
  ExperimentConfig c = from_json(j);
  const fs::path base = fs::path(path).parent_path();
  c.comparisons_path = resolve(base, c.comparisons_path);
  c.posts_path = resolve(base, c.posts_path);
  c.references_path = resolve(base, c.references_path);
  c.quality_path = resolve(base, c.quality_path);
  c.output_dir = resolve(base, c.output_dir);
  return c;
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("output_dir");
  j.erase("parallel");
  return hex64(fingerprint64(j.dump()));
}

std::string Provenance::line() const {
  return "config_hash=" + config_hash + ",corpus_hash=" + corpus_hash +
         ",seed=" + std::to_string(seed) + ",tool_version=" + std::string(kToolVersion);
}

json Provenance::to_json() const {
  return {{"config_hash", config_hash},
          {"corpus_hash", corpus_hash},
          {"seed", seed},
          {"tool_version", std::string(kToolVersion)}};
}

std::vector<CorrelationRow> correlation_rows(const std::string& name, const SummaryScorer& scorer,
                                             std::span<const QualityAnnotatedSummary> quality) {
  std::vector<CorrelationRow> rows;
  for (CorrelationLevel level : {CorrelationLevel::kSummary, CorrelationLevel::kSystem}) {
    CorrelationRow row{name, level == CorrelationLevel::kSummary ? "summary" : "system", {}};
    row.tau.fill(std::nan(""));
    try {
      const CorrelationReport report = correlate_with_quality(scorer, quality, level);
      for (std::size_t d = 0; d < 4; ++d) {
        if (report.dimensions[d].tau) row.tau[d] = *report.dimensions[d].tau;
      }
    } catch (const Error&) {
      // Left as nan; e.g. a single system has no system-level ranking.
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CorrelationRow> rouge_baseline_rows(std::span<const QualityAnnotatedSummary> quality) {
  if (quality.empty()) return {};
  std::map<std::pair<std::string, std::string>, std::string> ref_of;
  for (const QualityAnnotatedSummary& q : quality) {
    if (q.reference.empty()) return {};
    ref_of.emplace(std::make_pair(q.source_text, q.summary), q.reference);
  }
  const auto ref = [&ref_of](std::string_view src, std::string_view sum) -> const std::string& {
    return ref_of.at({std::string(src), std::string(sum)});
  };
  std::vector<CorrelationRow> rows;
  const auto add = [&](const std::string& name, const SummaryScorer& scorer) {
    for (CorrelationRow& r : correlation_rows(name, scorer, quality)) rows.push_back(std::move(r));
  };
  add("rouge-1", [&](std::string_view s, std::string_view y) { return rouge_n(y, ref(s, y), 1).f1; });
  add("rouge-2", [&](std::string_view s, std::string_view y) { return rouge_n(y, ref(s, y), 2).f1; });
  add("rouge-l", [&](std::string_view s, std::string_view y) { return rouge_l(y, ref(s, y)).f1; });
  return rows;
}

void write_correlation_csv(std::ostream& out, const Provenance& provenance,
                           std::span<const CorrelationRow> rows) {
  out << "# " << provenance.line() << '\n';
  out << "scorer,level,coherence,consistency,fluency,relevance\n";
  for (const CorrelationRow& r : rows) {
    out << r.scorer << ',' << r.level;
    for (double t : r.tau) out << ',' << fmt(t);
    out << '\n';
  }
}

bool MatrixReport::ok() const {
  for (const LaneReport& l : lanes) {
    if (!l.ok) return false;
  }
  return true;
}

void write_manifest(std::ostream& out, const Provenance& provenance,
                    std::span<const std::string> ids, std::span<const AgreementRecord> pool,
                    const json& extra) {
  std::unordered_map<std::string_view, const AgreementRecord*> by_id;
  for (const AgreementRecord& r : pool) by_id.emplace(r.comparison_id, &r);
  json head = provenance.to_json();
  head.update(extra);
  out << json{{"provenance", head}}.dump() << '\n';
  for (const std::string& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw Error("manifest: id '" + id + "' is not in the pool");
    out << json{{"comparison_id", id},
                {"agreement", it->second->agreement},
                {"repetitions", it->second->repetitions}}
               .dump()
        << '\n';
  }
}

std::vector<std::string> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path + "'");
  std::vector<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("provenance")) continue;
      ids.push_back(j.at("comparison_id").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ids;
}

MatrixReport run_matrix(const ExperimentConfig& config) {
  config.validate();
  const Inputs in = load_inputs(config);

  MatrixReport report;
  report.provenance = {config.hash(), corpus_hash(in.comparisons), config.seed};
  const Provenance& prov = report.provenance;
  fs::create_directories(config.output_dir);

  std::vector<LaneOutput> lanes;
  if (config.parallel) {
    std::vector<std::future<LaneOutput>> futures;
    for (const SamplingSpec& spec : config.strategies) {
      futures.push_back(std::async(std::launch::async, [&config, spec, &in, &prov] {
        return run_lane(config, spec, in, prov);
      }));
    }
    for (auto& f : futures) lanes.push_back(f.get());
  } else {
    for (const SamplingSpec& spec : config.strategies) {
      lanes.push_back(run_lane(config, spec, in, prov));
    }
  }

  const fs::path root(config.output_dir);
  const std::string header = "# " + prov.line() + "\n";

  // Accuracy curves side by side, one column per completed lane.
  {
    std::map<std::size_t, std::vector<std::string>> rows;
    std::vector<std::string> names;
    std::size_t col = 0;
    for (const LaneOutput& l : lanes) {
      if (!l.report.ok) continue;
      names.emplace_back(to_string(l.report.strategy));
      for (const CurvePoint& p : l.curve) {
        auto& row = rows[p.step];
        row.resize(names.size());
        row[col] = std::isnan(p.test_accuracy) ? "" : fmt(p.test_accuracy);
      }
      ++col;
    }
    std::ostringstream out;
    out << header << "step";
    for (const std::string& n : names) out << ',' << n;
    out << '\n';
    for (auto& [step, cells] : rows) {
      cells.resize(names.size());
      out << step;
      for (const std::string& c : cells) out << ',' << c;
      out << '\n';
    }
    write_file(root / "combined_accuracy.csv", out.str());
    report.files.push_back("combined_accuracy.csv");
  }

  {
    std::vector<CorrelationRow> rows;
    for (const LaneOutput& l : lanes) {
      if (l.report.ok) rows.insert(rows.end(), l.correlation.begin(), l.correlation.end());
    }
    const std::vector<CorrelationRow> baselines = rouge_baseline_rows(in.quality);
    rows.insert(rows.end(), baselines.begin(), baselines.end());
    std::ostringstream out;
    write_correlation_csv(out, prov, rows);
    write_file(root / "combined_correlation.csv", out.str());
    report.files.push_back("combined_correlation.csv");
  }

  {
    std::ostringstream out;
    out << header << "strategy,update,mean_reward,rouge1_f1,rouge2_f1,rougeL_f1\n";
    for (const LaneOutput& l : lanes) {
      if (!l.report.ok) continue;
      for (const RlhfPoint& p : l.rlhf) {
        out << to_string(l.report.strategy) << ',' << p.update << ',' << fmt(p.mean_reward) << ','
            << fmt(p.rouge1_f1) << ',' << fmt(p.rouge2_f1) << ',' << fmt(p.rougeL_f1) << '\n';
      }
    }
    write_file(root / "combined_rlhf.csv", out.str());
    report.files.push_back("combined_rlhf.csv");
  }

  {
    std::ostringstream out;
    out << header << "strategy,status,test_accuracy,error\n";
    for (const LaneOutput& l : lanes) {
      std::string err = l.report.error;
      for (char& ch : err) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      out << to_string(l.report.strategy) << ',' << (l.report.ok ? "ok" : "failed") << ','
          << (l.report.ok ? fmt(l.report.final_accuracy) : "") << ',' << err << '\n';
    }
    write_file(root / "lanes.csv", out.str());
    report.files.push_back("lanes.csv");
  }

  for (LaneOutput& l : lanes) report.lanes.push_back(std::move(l.report));
  return report;
}

}  // namespace agreerm
