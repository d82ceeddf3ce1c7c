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

#ifndef AGREERM_TEXT_H_
#define AGREERM_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agreerm {

// Lowercases ASCII and splits on runs of non-alphanumeric bytes. Bytes >= 0x80
// are kept inside tokens so UTF-8 words are never cut apart.
std::vector<std::string> tokenize(std::string_view text);

std::string_view trim(std::string_view text);

// Splits on '.', '!' or '?' followed by whitespace, and on newlines. Each
// sentence keeps its terminal punctuation; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

bool is_stopword(std::string_view token);

// Most frequent non-stopword tokens (frequency >= 2, length >= 3), ordered by
// frequency then first occurrence.
std::vector<std::string> extract_keywords(std::span<const std::string> tokens,
                                          std::size_t max_keywords);

// 64-bit FNV-1a over `bytes`, seeded and passed through a SplitMix finalizer.
std::uint64_t fingerprint64(std::string_view bytes, std::uint64_t seed = 0);

std::string hex64(std::uint64_t value);

std::string join(std::span<const std::string> parts, std::string_view sep);

}  // namespace agreerm

#endif  // AGREERM_TEXT_H_
