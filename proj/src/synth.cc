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

#include "agreerm/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "agreerm/error.h"
#include "agreerm/rng.h"
#include "agreerm/text.h"
#include "json.hpp"

namespace agreerm {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr std::array<std::string_view, 12> kGlue = {
    "the", "a", "of", "and", "to", "in", "my", "with", "was", "is", "for", "on"};

constexpr std::uint64_t kVocabSalt = 0x766f636162ULL;
constexpr std::uint64_t kQualitySalt = 0x7175616c697479ULL;

std::string make_word(std::uint64_t h, int syllables) {
  std::string w;
  for (int s = 0; s < syllables; ++s) {
    w.push_back(kConsonants[h % kConsonants.size()]);
    h /= kConsonants.size();
    w.push_back(kVowels[h % kVowels.size()]);
    h /= kVowels.size();
  }
  return w;
}

std::vector<std::string> make_vocab(std::size_t size, int syllables, std::uint64_t salt) {
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  for (std::uint64_t i = 0; words.size() < size; ++i) {
    std::string w = make_word(mix64(salt + i), syllables);
    if (seen.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

// Three-syllable topic words shared across posts, two-syllable filler words.
const std::vector<std::string>& keyword_vocab() {
  static const std::vector<std::string> vocab = make_vocab(400, 3, kVocabSalt);
  return vocab;
}

const std::vector<std::string>& filler_vocab() {
  static const std::vector<std::string> vocab = make_vocab(3000, 2, kVocabSalt + 1);
  return vocab;
}

struct SynthPost {
  Post post;
  std::vector<std::vector<std::string>> sentences;  // tokens
  std::vector<std::string> keywords;
};

class FillerSource {
 public:
  explicit FillerSource(Rng& rng) : rng_(rng) {}
  // Fresh filler word, never repeated within one source.
  const std::string& next() {
    const auto& vocab = filler_vocab();
    while (true) {
      const std::size_t i = rng_.below(vocab.size());
      if (used_.insert(i).second) return vocab[i];
    }
  }

 private:
  Rng& rng_;
  std::unordered_set<std::size_t> used_;
};

std::string sentence_text(const std::vector<std::string>& tokens) {
  return join(tokens, " ") + ".";
}

SynthPost make_post(const SynthConfig& config, std::size_t index, Rng& rng,
                    FillerSource& fillers) {
  SynthPost out;
  const auto& kw_vocab = keyword_vocab();
  std::set<std::size_t> chosen;
  while (chosen.size() < config.oracle.keyword_count) chosen.insert(rng.below(kw_vocab.size()));
  for (std::size_t i : chosen) out.keywords.push_back(kw_vocab[i]);
  rng.shuffle(std::span<std::string>(out.keywords));

  const std::size_t s_count =
      config.min_sentences + rng.below(config.max_sentences - config.min_sentences + 1);
  const std::size_t content = std::max<std::size_t>(2, s_count / 2);
  std::vector<std::size_t> slots(s_count);
  for (std::size_t i = 0; i < s_count; ++i) slots[i] = i;
  rng.shuffle(std::span<std::size_t>(slots));
  slots.resize(content);

  out.sentences.resize(s_count);
  for (auto& sentence : out.sentences) {
    const std::size_t length = 6 + rng.below(7);
    for (std::size_t t = 0; t < length; ++t) {
      if (rng.bernoulli(0.35)) {
        sentence.emplace_back(kGlue[rng.below(kGlue.size())]);
      } else {
        sentence.push_back(fillers.next());
      }
    }
  }
  for (const std::string& kw : out.keywords) {
    const std::size_t occurrences = 3 + rng.below(2);
    for (std::size_t o = 0; o < occurrences; ++o) {
      auto& sentence = out.sentences[slots[rng.below(slots.size())]];
      sentence.insert(sentence.begin() + static_cast<std::ptrdiff_t>(rng.below(sentence.size() + 1)), kw);
    }
  }

  std::vector<std::string> texts;
  for (const auto& sentence : out.sentences) texts.push_back(sentence_text(sentence));
  char id[32];
  std::snprintf(id, sizeof(id), "post-%06zu", index);
  out.post.id = id;
  out.post.body = join(texts, " ");
  out.post.source_tag = "synthetic";
  return out;
}

struct Candidate {
  std::string text;
  std::string tag;
};

Candidate make_candidate(const SynthPost& post, Rng& rng, FillerSource& fillers) {
  const std::size_t s_count = post.sentences.size();
  const std::size_t picks = 1 + rng.below(std::min<std::size_t>(3, s_count));
  std::set<std::size_t> chosen;
  while (chosen.size() < picks) chosen.insert(rng.below(s_count));

  std::vector<std::string> tokens;
  for (std::size_t i : chosen) {
    tokens.insert(tokens.end(), post.sentences[i].begin(), post.sentences[i].end());
  }
  std::string tag = "extract" + std::to_string(picks);

  if (rng.bernoulli(0.4)) {
    std::vector<std::string> present;
    for (const std::string& kw : post.keywords) {
      if (std::find(tokens.begin(), tokens.end(), kw) != tokens.end()) present.push_back(kw);
    }
    if (!present.empty()) {
      const std::size_t drops = std::min<std::size_t>(present.size(), 1 + rng.below(2));
      rng.shuffle(std::span<std::string>(present));
      for (std::size_t d = 0; d < drops; ++d) {
        std::erase(tokens, present[d]);
      }
      tag += "+drop";
    }
  }
  if (rng.bernoulli(0.35)) {
    const std::size_t pad = 4 + rng.below(7);
    for (std::size_t p = 0; p < pad; ++p) tokens.push_back(fillers.next());
    tag += "+pad";
  }
  if (tokens.size() >= 2 && rng.bernoulli(0.3)) {
    const std::size_t at = rng.below(tokens.size() - 1);
    const std::string first = tokens[at];
    const std::string second = tokens[at + 1];
    const std::size_t copies = 1 + rng.below(3);
    auto pos = tokens.begin() + static_cast<std::ptrdiff_t>(at + 2);
    for (std::size_t c = 0; c < copies; ++c) {
      pos = tokens.insert(pos, second);
      pos = tokens.insert(pos, first);
      pos += 2;
    }
    tag += "+repeat";
  }
  if (tokens.empty()) tokens.push_back(fillers.next());
  return {sentence_text(tokens), tag};
}

// Best selection of `count` sentences kept in post order.
std::string reference_for(const QualityOracle& oracle, const SynthPost& post,
                          std::size_t count) {
  const std::size_t s_count = post.sentences.size();
  count = std::min(count, s_count);
  std::vector<bool> mask(s_count, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(count), true);
  std::string best;
  double best_q = -INFINITY;
  do {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < s_count; ++i) {
      if (mask[i]) parts.push_back(sentence_text(post.sentences[i]));
    }
    std::string text = join(parts, " ");
    const double q = oracle_score(oracle, post.post.body, text);
    if (q > best_q) {
      best_q = q;
      best = std::move(text);
    }
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

}  // namespace

void QualityOracle::validate() const {
  if (!std::isfinite(keyword_weight) || !std::isfinite(length_weight) ||
      !std::isfinite(repetition_weight)) {
    throw Error("quality oracle weights must be finite");
  }
  if (target_length < 1) throw Error("quality oracle target length must be positive");
  if (keyword_count < 1) throw Error("quality oracle keyword count must be positive");
}

OracleTerms oracle_terms(const QualityOracle& oracle, std::string_view post,
                         std::string_view summary) {
  const std::vector<std::string> post_tokens = tokenize(post);
  const std::vector<std::string> tokens = tokenize(summary);
  const std::vector<std::string> keywords =
      extract_keywords(post_tokens, oracle.keyword_count);

  OracleTerms terms;
  if (!keywords.empty()) {
    const std::unordered_set<std::string_view> present(tokens.begin(), tokens.end());
    std::size_t covered = 0;
    for (const std::string& kw : keywords) covered += present.count(kw);
    terms.keyword_coverage = static_cast<double>(covered) / keywords.size();
  }
  const double target = oracle.target_length;
  terms.length_fit =
      std::exp(-std::abs(static_cast<double>(tokens.size()) - target) / target);
  if (tokens.size() >= 2) {
    std::unordered_map<std::string, std::size_t> bigrams;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      ++bigrams[tokens[i] + '\x1f' + tokens[i + 1]];
    }
    std::size_t repeated = 0;
    for (const auto& kv : bigrams) {
      if (kv.second >= 2) repeated += kv.second;
    }
    terms.repeated_bigrams = static_cast<double>(repeated) / (tokens.size() - 1);
  }
  return terms;
}

double oracle_score(const QualityOracle& oracle, std::string_view post,
                    std::string_view summary) {
  const OracleTerms t = oracle_terms(oracle, post, summary);
  return oracle.keyword_weight * t.keyword_coverage + oracle.length_weight * t.length_fit -
         oracle.repetition_weight * t.repeated_bigrams;
}

void AnnotatorModel::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error("annotator beta must be finite and >= 0");
  if (annotators_per_comparison < 1) throw Error("annotators per comparison must be positive");
}

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double vote_probability(const AnnotatorModel& annotator, double q_a, double q_b) {
  return logistic(annotator.beta * (q_a - q_b));
}

void SynthConfig::validate() const {
  oracle.validate();
  annotator.validate();
  if (candidates_per_post < 2) throw Error("need at least 2 candidates per post");
  if (min_sentences < 2 || max_sentences < min_sentences) {
    throw Error("invalid sentence count range");
  }
  if (reference_sentences < 1) throw Error("reference needs at least one sentence");
}

SyntheticCorpus generate_corpus(const SynthConfig& config) {
  config.validate();
  SyntheticCorpus out;
  const int m = config.annotator.annotators_per_comparison;
  for (std::size_t p = 0; p < config.n_posts; ++p) {
    Rng rng = Rng::stream(config.seed, p);
    FillerSource fillers(rng);
    const SynthPost post = make_post(config, p, rng, fillers);

    std::vector<Candidate> candidates;
    std::unordered_set<std::string> texts;
    for (std::size_t attempt = 0;
         candidates.size() < config.candidates_per_post && attempt < 50 * config.candidates_per_post;
         ++attempt) {
      Candidate c = make_candidate(post, rng, fillers);
      if (texts.insert(c.text).second) candidates.push_back(std::move(c));
    }
    std::vector<double> q;
    for (const Candidate& c : candidates) {
      q.push_back(oracle_score(config.oracle, post.post.body, c.text));
    }

    for (std::size_t i = 0; i < candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < candidates.size(); ++j) {
        Comparison c;
        c.id = post.post.id + "-c" + std::to_string(i) + std::to_string(j);
        c.post_id = post.post.id;
        c.summary_a = candidates[i].text;
        c.summary_b = candidates[j].text;
        c.policy_a = candidates[i].tag;
        c.policy_b = candidates[j].tag;
        const double p_a = vote_probability(config.annotator, q[i], q[j]);
        for (int v = 0; v < m; ++v) {
          (rng.bernoulli(p_a) ? c.votes_a : c.votes_b) += 1;
        }
        GroundTruth truth{c.id, q[i], q[j]};
        if (c.summary_b < c.summary_a) std::swap(truth.q_a, truth.q_b);
        normalize_order(c);
        out.comparisons.push_back(std::move(c));
        out.truth.push_back(std::move(truth));
      }
    }
    out.references.push_back(
        {post.post.id, reference_for(config.oracle, post, config.reference_sentences)});
    out.posts.push_back(post.post);
  }
  return out;
}

std::vector<QualityAnnotatedSummary> generate_quality_annotations(
    const QualityOracle& oracle, std::size_t n_posts, std::size_t summaries_per_post,
    std::uint64_t seed) {
  oracle.validate();
  SynthConfig config;
  config.oracle = oracle;
  std::vector<QualityAnnotatedSummary> out;
  for (std::size_t p = 0; p < n_posts; ++p) {
    Rng rng = Rng::stream(seed ^ kQualitySalt, p);
    FillerSource fillers(rng);
    const SynthPost post = make_post(config, p, rng, fillers);
    const std::string reference = reference_for(oracle, post, config.reference_sentences);
    const std::vector<std::string> source_tokens = tokenize(post.post.body);
    const std::unordered_set<std::string> source_vocab(source_tokens.begin(),
                                                       source_tokens.end());
    std::unordered_set<std::string> seen;
    for (std::size_t s = 0, attempt = 0; s < summaries_per_post && attempt < 50 * summaries_per_post;
         ++attempt) {
      const Candidate c = make_candidate(post, rng, fillers);
      if (!seen.insert(c.text).second) continue;
      const OracleTerms t = oracle_terms(oracle, post.post.body, c.text);
      const std::vector<std::string> tokens = tokenize(c.text);
      std::size_t supported = 0;
      for (const std::string& tok : tokens) supported += source_vocab.count(tok);
      const double support = tokens.empty() ? 0.0 : static_cast<double>(supported) / tokens.size();

      const double latent[4] = {1.0 + 4.0 * t.length_fit, 1.0 + 4.0 * support,
                                5.0 - 4.0 * t.repeated_bigrams, 1.0 + 4.0 * t.keyword_coverage};
      double rating[4] = {0, 0, 0, 0};
      for (int expert = 0; expert < 3; ++expert) {
        for (int d = 0; d < 4; ++d) {
          const double r = std::round(latent[d] + 0.5 * rng.normal());
          rating[d] += std::clamp(r, 1.0, 5.0) / 3.0;
        }
      }
      QualityAnnotatedSummary rec;
      rec.id = post.post.id + "-s" + std::to_string(s);
      rec.source_text = post.post.body;
      rec.summary = c.text;
      rec.coherence = rating[0];
      rec.consistency = rating[1];
      rec.fluency = rating[2];
      rec.relevance = rating[3];
      rec.system_id = c.tag;
      rec.reference = reference;
      out.push_back(std::move(rec));
      ++s;
    }
  }
  return out;
}

void write_ground_truth(std::ostream& out, std::span<const GroundTruth> truth) {
  for (const GroundTruth& t : truth) {
    nlohmann::json obj = {{"comparison_id", t.comparison_id}, {"q_a", t.q_a}, {"q_b", t.q_b}};
    out << obj.dump() << '\n';
  }
}

std::vector<GroundTruth> load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::vector<GroundTruth> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || is_provenance_line(line)) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      out.push_back({obj.at("comparison_id").get<std::string>(), obj.at("q_a").get<double>(),
                     obj.at("q_b").get<double>()});
    } catch (const std::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace agreerm
