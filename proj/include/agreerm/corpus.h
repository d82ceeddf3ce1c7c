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

#ifndef AGREERM_CORPUS_H_
#define AGREERM_CORPUS_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace agreerm {

struct Post {
  std::string id;
  std::string title;
  std::string body;
  std::string source_tag;

  friend bool operator==(const Post&, const Post&) = default;
};

// Text the reward model sees as context for a post.
std::string context_text(const Post& post);

// Two candidate summaries for one post with per-side annotator tallies.
// After ingestion summary_a < summary_b lexicographically.
struct Comparison {
  std::string id;
  std::string post_id;
  std::string summary_a;
  std::string summary_b;
  int votes_a = 0;
  int votes_b = 0;
  std::string policy_a;
  std::string policy_b;

  int repetitions() const { return votes_a + votes_b; }

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

// Puts the pair in lexicographic order, swapping votes and policy tags along
// with the summaries.
void normalize_order(Comparison& comparison);

struct ReferencePair {
  std::string post_id;
  std::string reference_summary;

  friend bool operator==(const ReferencePair&, const ReferencePair&) = default;
};

// A summary with averaged expert ratings on the four quality dimensions.
// system_id and reference are optional extras used for system-level
// correlation and ROUGE baselines.
struct QualityAnnotatedSummary {
  std::string id;
  std::string source_text;
  std::string summary;
  double coherence = 0.0;
  double consistency = 0.0;
  double fluency = 0.0;
  double relevance = 0.0;
  std::string system_id;
  std::string reference;

  friend bool operator==(const QualityAnnotatedSummary&,
                         const QualityAnnotatedSummary&) = default;
};

enum class ComparisonFormat { kCanonical, kTldrOpenAi };

ComparisonFormat parse_comparison_format(std::string_view tag);
std::string_view to_string(ComparisonFormat format);

struct LoadReport {
  std::size_t lines = 0;  // non-blank lines seen
  std::size_t malformed = 0;
  std::size_t judgements = 0;  // judgements merged into comparisons
  std::vector<std::string> diagnostics;  // first few malformed-line messages
};

struct ComparisonSet {
  std::vector<Comparison> comparisons;
  std::vector<Post> posts;  // only populated by formats that embed posts
  LoadReport report;
};

// Fraction of malformed lines above which loading aborts.
inline constexpr double kMaxMalformedFraction = 0.10;

ComparisonSet load_comparisons(const std::string& path, ComparisonFormat format);
ComparisonSet parse_comparisons(std::istream& in, ComparisonFormat format,
                                std::string_view source_name = "<stream>");

// Comparisons judged by at least two annotators, in input order.
std::vector<Comparison> filter_multi_annotated(
    std::span<const Comparison> comparisons);

struct QualityLoadResult {
  std::vector<QualityAnnotatedSummary> records;
  std::vector<std::string> rejected;  // one diagnostic per rejected record
};

QualityLoadResult load_quality_annotations(const std::string& path);
QualityLoadResult parse_quality_annotations(std::istream& in);

// The {"provenance": {...}} header line that CLI outputs start with; every
// loader skips it.
bool is_provenance_line(std::string_view line);

std::vector<Post> load_posts(const std::string& path);
std::vector<ReferencePair> load_references(const std::string& path);

void write_comparisons(std::ostream& out, std::span<const Comparison> items);
void write_posts(std::ostream& out, std::span<const Post> items);
void write_references(std::ostream& out, std::span<const ReferencePair> items);
void write_quality_annotations(std::ostream& out,
                               std::span<const QualityAnnotatedSummary> items);

// post id -> context text, with a checked lookup.
class ContextIndex {
 public:
  ContextIndex() = default;
  explicit ContextIndex(std::span<const Post> posts);

  const std::string& at(const std::string& post_id) const;
  bool contains(const std::string& post_id) const {
    return contexts_.count(post_id) > 0;
  }
  std::size_t size() const { return contexts_.size(); }

 private:
  std::unordered_map<std::string, std::string> contexts_;
};

// Hash over the canonical serialization, for provenance headers.
std::string corpus_hash(std::span<const Comparison> comparisons);

}  // namespace agreerm

#endif  // AGREERM_CORPUS_H_
