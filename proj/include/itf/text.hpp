#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "itf/utf8.hpp"

namespace itf {

struct Token {
  std::size_t begin = 0;  // code points
  std::size_t end = 0;
  std::string norm;  // ASCII-lowercased; "×" normalizes to "x"
  bool numeric = false;
};

struct Sentence {
  std::size_t begin = 0;  // code points
  std::size_t end = 0;
  std::size_t first_token = 0;
  std::size_t last_token = 0;  // exclusive
};

/// Tokens and sentences of one report.
///
/// Tokens are maximal runs of letters or of digits (a '.' between digits stays inside
/// the number); everything else separates. Sentences end at '.' or ';' followed by
/// whitespace or end of text, and at every newline.
class AnalyzedText {
 public:
  explicit AnalyzedText(std::string text);

  const Utf8Text& text() const noexcept { return text_; }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
  std::size_t length() const noexcept { return text_.size(); }

 private:
  Utf8Text text_;
  std::vector<Token> tokens_;
  std::vector<Sentence> sentences_;
};

/// Normalized token sequence of a lexicon phrase ("Non-emergent US" -> {"non", "emergent", "us"}).
std::vector<std::string> phrase_tokens(std::string_view phrase);

/// Longest-match dictionary over token sequences.
template <typename Payload>
class PhraseMatcher {
 public:
  struct Match {
    std::size_t first_token;
    std::size_t last_token;  // exclusive
    const Payload* payload;
  };

  /// Returns false (and keeps the existing entry) if the phrase is already present.
  bool add(std::string_view phrase, Payload payload) {
    auto toks = phrase_tokens(phrase);
    if (toks.empty()) return false;
    max_len_ = std::max(max_len_, toks.size());
    return entries_.emplace(join(toks), std::move(payload)).second;
  }

  const Payload* find(std::string_view phrase) const {
    auto it = entries_.find(join(phrase_tokens(phrase)));
    return it == entries_.end() ? nullptr : &it->second;
  }

  /// Non-overlapping leftmost-longest matches within tokens [first, last).
  std::vector<Match> match(const std::vector<Token>& tokens, std::size_t first, std::size_t last) const {
    std::vector<Match> out;
    std::size_t i = first;
    while (i < last) {
      bool found = false;
      for (std::size_t len = std::min(max_len_, last - i); len >= 1; --len) {
        std::string key;
        for (std::size_t k = i; k < i + len; ++k) {
          if (k > i) key.push_back('\x1f');
          key += tokens[k].norm;
        }
        auto it = entries_.find(key);
        if (it != entries_.end()) {
          out.push_back({i, i + len, &it->second});
          i += len;
          found = true;
          break;
        }
      }
      if (!found) ++i;
    }
    return out;
  }

 private:
  static std::string join(const std::vector<std::string>& toks) {
    std::string key;
    for (std::size_t k = 0; k < toks.size(); ++k) {
      if (k) key.push_back('\x1f');
      key += toks[k];
    }
    return key;
  }

  std::unordered_map<std::string, Payload> entries_;
  std::size_t max_len_ = 0;
};

}  // namespace itf
