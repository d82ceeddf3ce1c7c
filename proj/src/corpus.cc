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

#include "agreerm/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "agreerm/error.h"
#include "agreerm/text.h"
#include "json.hpp"

namespace agreerm {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxDiagnostics = 20;

class LineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const json& require(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw LineError(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw LineError(std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

std::string optional_string(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw LineError(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

int require_count(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number_integer() || v.get<long long>() < 0 ||
      v.get<long long>() > 1'000'000'000) {
    throw LineError(std::string("field '") + key + "' is not a non-negative integer");
  }
  return static_cast<int>(v.get<long long>());
}

void validate_comparison(Comparison& c) {
  c.summary_a = std::string(trim(c.summary_a));
  c.summary_b = std::string(trim(c.summary_b));
  if (c.id.empty()) throw LineError("empty comparison id");
  if (c.post_id.empty()) throw LineError("empty post_id");
  if (c.summary_a.empty() || c.summary_b.empty()) throw LineError("empty summary");
  if (c.summary_a == c.summary_b) throw LineError("identical summaries");
  if (c.repetitions() < 1) throw LineError("comparison has no votes");
}

std::string pair_key(const Comparison& c) {
  std::string key = c.post_id;
  key.push_back('\x1f');
  key += c.summary_a;
  key.push_back('\x1f');
  key += c.summary_b;
  return key;
}

Comparison parse_canonical(const json& obj) {
  Comparison c;
  c.id = require_string(obj, "id");
  c.post_id = require_string(obj, "post_id");
  c.summary_a = require_string(obj, "summary_a");
  c.summary_b = require_string(obj, "summary_b");
  c.votes_a = require_count(obj, "votes_a");
  c.votes_b = require_count(obj, "votes_b");
  c.policy_a = optional_string(obj, "policy_a");
  c.policy_b = optional_string(obj, "policy_b");
  return c;
}

// Adapter for the public TL;DR human-feedback comparison dumps. One line is
// one judgement:
//
//   info.id                       -> Post.id, Comparison.post_id
//   info.post (or info.article)   -> Post.body
//   info.title                    -> Post.title
//   info.subreddit (or info.site) -> Post.source_tag
//   summaries[i].text             -> summary_a / summary_b
//   summaries[i].policy           -> policy_a / policy_b
//   choice (0 or 1)               -> one vote for that summary
//
// Comparison ids are derived from a fingerprint of (post, pair) since the
// dump has no per-pair identifier.
Comparison parse_tldr(const json& obj, Post& post) {
  const json& info = require(obj, "info");
  if (!info.is_object()) throw LineError("'info' is not an object");
  post.id = require_string(info, "id");
  post.body = info.contains("post") ? optional_string(info, "post")
                                    : optional_string(info, "article");
  post.title = optional_string(info, "title");
  post.source_tag = info.contains("subreddit") ? optional_string(info, "subreddit")
                                               : optional_string(info, "site");
  if (trim(post.body).empty()) throw LineError("post body is empty");

  const json& summaries = require(obj, "summaries");
  if (!summaries.is_array() || summaries.size() != 2) {
    throw LineError("'summaries' must hold exactly two entries");
  }
  const int choice = require_count(obj, "choice");
  if (choice > 1) throw LineError("'choice' must be 0 or 1");

  Comparison c;
  c.post_id = post.id;
  c.summary_a = require_string(summaries[0], "text");
  c.summary_b = require_string(summaries[1], "text");
  c.policy_a = optional_string(summaries[0], "policy");
  c.policy_b = optional_string(summaries[1], "policy");
  (choice == 0 ? c.votes_a : c.votes_b) = 1;
  return c;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

double average_rating(const json& v, const char* dim) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && !v.empty()) {
    double sum = 0.0;
    for (const json& r : v) {
      if (!r.is_number()) throw LineError(std::string("non-numeric ") + dim + " rating");
      const double x = r.get<double>();
      if (x < 1.0 || x > 5.0) {
        throw LineError(std::string(dim) + " rating out of range [1,5]");
      }
      sum += x;
    }
    return sum / static_cast<double>(v.size());
  }
  throw LineError(std::string("invalid ") + dim + " rating");
}

}  // namespace

std::string context_text(const Post& post) {
  if (post.title.empty()) return post.body;
  return post.title + "\n" + post.body;
}

void normalize_order(Comparison& c) {
  if (c.summary_b < c.summary_a) {
    std::swap(c.summary_a, c.summary_b);
    std::swap(c.votes_a, c.votes_b);
    std::swap(c.policy_a, c.policy_b);
  }
}

ComparisonFormat parse_comparison_format(std::string_view tag) {
  if (tag == "canonical") return ComparisonFormat::kCanonical;
  if (tag == "tldr-openai") return ComparisonFormat::kTldrOpenAi;
  throw Error("unknown comparison format '" + std::string(tag) +
              "' (expected canonical or tldr-openai)");
}

std::string_view to_string(ComparisonFormat format) {
  return format == ComparisonFormat::kCanonical ? "canonical" : "tldr-openai";
}

ComparisonSet parse_comparisons(std::istream& in, ComparisonFormat format,
                                std::string_view source_name) {
  ComparisonSet out;
  LoadReport& report = out.report;
  std::unordered_map<std::string, std::size_t> by_key;
  std::unordered_map<std::string, std::string> key_of_id;
  std::unordered_set<std::string> post_ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || is_provenance_line(line)) continue;
    ++report.lines;
    try {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        throw LineError("invalid JSON");
      }
      if (!obj.is_object()) throw LineError("line is not a JSON object");

      Comparison c;
      Post post;
      if (format == ComparisonFormat::kCanonical) {
        c = parse_canonical(obj);
      } else {
        c = parse_tldr(obj, post);
        c.summary_a = std::string(trim(c.summary_a));
        c.summary_b = std::string(trim(c.summary_b));
        normalize_order(c);
        c.id = "c" + hex64(fingerprint64(pair_key(c)));
      }
      validate_comparison(c);
      normalize_order(c);

      const std::string key = pair_key(c);
      if (auto id_it = key_of_id.find(c.id);
          id_it != key_of_id.end() && id_it->second != key) {
        throw LineError("comparison id '" + c.id + "' reused for a different pair");
      }
      if (auto it = by_key.find(key); it != by_key.end()) {
        Comparison& merged = out.comparisons[it->second];
        merged.votes_a += c.votes_a;
        merged.votes_b += c.votes_b;
      } else {
        key_of_id.emplace(c.id, key);
        by_key.emplace(key, out.comparisons.size());
        out.comparisons.push_back(std::move(c));
      }
      report.judgements += 1;
      if (format == ComparisonFormat::kTldrOpenAi && post_ids.insert(post.id).second) {
        post.body = std::string(trim(post.body));
        out.posts.push_back(std::move(post));
      }
    } catch (const LineError& e) {
      ++report.malformed;
      if (report.diagnostics.size() < kMaxDiagnostics) {
        std::ostringstream msg;
        msg << source_name << ":" << line_no << ": " << e.what();
        report.diagnostics.push_back(msg.str());
      }
    } catch (const json::exception& e) {
      ++report.malformed;
      if (report.diagnostics.size() < kMaxDiagnostics) {
        std::ostringstream msg;
        msg << source_name << ":" << line_no << ": " << e.what();
        report.diagnostics.push_back(msg.str());
      }
    }
  }

  if (out.comparisons.empty()) {
    throw Error("empty corpus: no valid comparisons in " + std::string(source_name));
  }
  if (static_cast<double>(report.malformed) >
      kMaxMalformedFraction * static_cast<double>(report.lines)) {
    std::ostringstream msg;
    msg << source_name << ": " << report.malformed << " of " << report.lines
        << " lines are malformed (limit "
        << static_cast<int>(kMaxMalformedFraction * 100) << "%)";
    if (!report.diagnostics.empty()) msg << "; first: " << report.diagnostics.front();
    throw Error(msg.str());
  }
  return out;
}

ComparisonSet load_comparisons(const std::string& path, ComparisonFormat format) {
  std::ifstream in = open_input(path);
  return parse_comparisons(in, format, path);
}

std::vector<Comparison> filter_multi_annotated(
    std::span<const Comparison> comparisons) {
  std::vector<Comparison> out;
  for (const Comparison& c : comparisons) {
    if (c.repetitions() >= 2) out.push_back(c);
  }
  return out;
}

QualityLoadResult parse_quality_annotations(std::istream& in) {
  static constexpr const char* kDims[] = {"coherence", "consistency", "fluency",
                                          "relevance"};
  QualityLoadResult out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || is_provenance_line(line)) continue;
    try {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error&) {
        throw LineError("invalid JSON");
      }
      if (!obj.is_object()) throw LineError("line is not a JSON object");
      QualityAnnotatedSummary r;
      const json& id = require(obj, "id");
      r.id = id.is_string() ? id.get<std::string>() : id.dump();
      r.source_text = obj.contains("source_text") ? require_string(obj, "source_text")
                                                  : require_string(obj, "text");
      r.summary = obj.contains("summary") ? require_string(obj, "summary")
                                          : require_string(obj, "decoded");
      r.system_id = obj.contains("system_id") ? optional_string(obj, "system_id")
                                              : optional_string(obj, "model_id");
      if (const auto it = obj.find("reference"); it != obj.end()) {
        r.reference = optional_string(obj, "reference");
      } else if (const auto refs = obj.find("references");
                 refs != obj.end() && refs->is_array() && !refs->empty() &&
                 (*refs)[0].is_string()) {
        r.reference = (*refs)[0].get<std::string>();
      }
      if (trim(r.summary).empty()) throw LineError("empty summary");

      double* targets[] = {&r.coherence, &r.consistency, &r.fluency, &r.relevance};
      if (const auto ex = obj.find("expert_annotations");
          ex != obj.end() && !obj.contains("coherence")) {
        if (!ex->is_array() || ex->empty()) {
          throw LineError("'expert_annotations' must be a non-empty array");
        }
        for (int d = 0; d < 4; ++d) {
          json ratings = json::array();
          for (const json& expert : *ex) ratings.push_back(require(expert, kDims[d]));
          *targets[d] = average_rating(ratings, kDims[d]);
        }
      } else {
        for (int d = 0; d < 4; ++d) {
          *targets[d] = average_rating(require(obj, kDims[d]), kDims[d]);
        }
      }
      for (int d = 0; d < 4; ++d) {
        if (!(*targets[d] >= 1.0 && *targets[d] <= 5.0)) {
          throw LineError(std::string(kDims[d]) + " rating out of range [1,5]");
        }
      }
      if (!seen.insert(r.id).second) throw LineError("duplicate id '" + r.id + "'");
      out.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "line " << line_no << ": " << e.what();
      out.rejected.push_back(msg.str());
    }
  }
  return out;
}

QualityLoadResult load_quality_annotations(const std::string& path) {
  std::ifstream in = open_input(path);
  return parse_quality_annotations(in);
}

bool is_provenance_line(std::string_view line) {
  return trim(line).starts_with("{\"provenance\":");
}

std::vector<Post> load_posts(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<Post> posts;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || is_provenance_line(line)) continue;
    try {
      const json obj = json::parse(line);
      Post p;
      p.id = require_string(obj, "id");
      p.title = optional_string(obj, "title");
      p.body = require_string(obj, "body");
      p.source_tag = optional_string(obj, "source_tag");
      if (trim(p.body).empty()) throw LineError("empty body");
      if (!ids.insert(p.id).second) throw LineError("duplicate post id '" + p.id + "'");
      posts.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return posts;
}

std::vector<ReferencePair> load_references(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<ReferencePair> refs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || is_provenance_line(line)) continue;
    try {
      const json obj = json::parse(line);
      ReferencePair r{require_string(obj, "post_id"),
                      require_string(obj, "reference_summary")};
      if (trim(r.reference_summary).empty()) throw LineError("empty reference");
      refs.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return refs;
}

void write_comparisons(std::ostream& out, std::span<const Comparison> items) {
  for (const Comparison& c : items) {
    json obj = {{"id", c.id},           {"post_id", c.post_id},
                {"summary_a", c.summary_a}, {"summary_b", c.summary_b},
                {"votes_a", c.votes_a},   {"votes_b", c.votes_b},
                {"policy_a", c.policy_a}, {"policy_b", c.policy_b}};
    out << obj.dump() << '\n';
  }
}

void write_posts(std::ostream& out, std::span<const Post> items) {
  for (const Post& p : items) {
    json obj = {{"id", p.id},
                {"title", p.title},
                {"body", p.body},
                {"source_tag", p.source_tag}};
    out << obj.dump() << '\n';
  }
}

void write_references(std::ostream& out, std::span<const ReferencePair> items) {
  for (const ReferencePair& r : items) {
    json obj = {{"post_id", r.post_id}, {"reference_summary", r.reference_summary}};
    out << obj.dump() << '\n';
  }
}

void write_quality_annotations(std::ostream& out,
                               std::span<const QualityAnnotatedSummary> items) {
  for (const QualityAnnotatedSummary& r : items) {
    json obj = {{"id", r.id},
                {"source_text", r.source_text},
                {"summary", r.summary},
                {"coherence", r.coherence},
                {"consistency", r.consistency},
                {"fluency", r.fluency},
                {"relevance", r.relevance}};
    if (!r.system_id.empty()) obj["system_id"] = r.system_id;
    if (!r.reference.empty()) obj["reference"] = r.reference;
    out << obj.dump() << '\n';
  }
}

ContextIndex::ContextIndex(std::span<const Post> posts) {
  for (const Post& p : posts) contexts_.emplace(p.id, context_text(p));
}

const std::string& ContextIndex::at(const std::string& post_id) const {
  const auto it = contexts_.find(post_id);
  if (it == contexts_.end()) throw Error("unknown post id '" + post_id + "'");
  return it->second;
}

std::string corpus_hash(std::span<const Comparison> comparisons) {
  std::ostringstream buf;
  write_comparisons(buf, comparisons);
  return hex64(fingerprint64(buf.str()));
}

}  // namespace agreerm
