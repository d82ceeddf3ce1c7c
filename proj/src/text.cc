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

#include "agreerm/text.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <unordered_map>

#include "agreerm/rng.h"

namespace agreerm {
namespace {

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

constexpr std::array<std::string_view, 48> kStopwords = {
    "a",     "an",   "and",   "are",  "as",    "at",   "be",    "but",
    "by",    "for",  "from",  "had",  "has",   "have", "he",    "her",
    "his",   "i",    "if",    "in",   "is",    "it",   "its",   "me",
    "my",    "not",  "of",    "on",   "or",    "our",  "she",   "so",
    "that",  "the",  "their", "them", "then",  "they", "this",  "to",
    "was",   "we",   "were",  "what", "which", "with", "would", "you"};

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string_view trim(std::string_view text) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  const auto flush = [&](std::size_t end) {
    const auto piece = trim(text.substr(start, end - start));
    if (!piece.empty()) sentences.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      flush(i);
      start = i + 1;
    } else if (c == '.' || c == '!' || c == '?') {
      const bool at_end = i + 1 == text.size();
      if (at_end || text[i + 1] == ' ' || text[i + 1] == '\n' ||
          text[i + 1] == '\t' || text[i + 1] == '\r') {
        flush(i + 1);
      }
    }
  }
  flush(text.size());
  return sentences;
}

bool is_stopword(std::string_view token) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), token);
}

std::vector<std::string> extract_keywords(std::span<const std::string> tokens,
                                          std::size_t max_keywords) {
  struct Entry {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string_view, Entry> counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (t.size() < 3 || is_stopword(t)) continue;
    auto [it, inserted] = counts.try_emplace(t, Entry{0, i});
    ++it->second.count;
  }
  std::vector<std::pair<std::string_view, Entry>> ranked;
  for (const auto& kv : counts) {
    if (kv.second.count >= 2) ranked.emplace_back(kv);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& l, const auto& r) {
    if (l.second.count != r.second.count) return l.second.count > r.second.count;
    return l.second.first < r.second.first;
  });
  if (ranked.size() > max_keywords) ranked.resize(max_keywords);
  std::vector<std::string> keywords;
  keywords.reserve(ranked.size());
  for (const auto& kv : ranked) keywords.emplace_back(kv.first);
  return keywords;
}

std::uint64_t fingerprint64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

}  // namespace agreerm
