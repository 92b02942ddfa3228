#include "itf/text.hpp"

namespace itf {
namespace {

enum class CharClass { Letter, Digit, Times, Space, Other };

CharClass classify(char32_t c) {
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return CharClass::Letter;
  if (c >= '0' && c <= '9') return CharClass::Digit;
  if (c == 0x00D7) return CharClass::Times;
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0x00A0) return CharClass::Space;
  if (c < 0x80) return CharClass::Other;
  // General punctuation block, dashes and quotes behave as separators.
  if ((c >= 0x2000 && c <= 0x206F) || c == 0x00B7) return CharClass::Other;
  return CharClass::Letter;
}

bool is_space(char32_t c) { return classify(c) == CharClass::Space; }

}  // namespace

std::vector<std::string> phrase_tokens(std::string_view phrase) {
  AnalyzedText t{std::string(phrase)};
  std::vector<std::string> out;
  out.reserve(t.tokens().size());
  for (const auto& tok : t.tokens()) out.push_back(tok.norm);
  return out;
}

AnalyzedText::AnalyzedText(std::string text) : text_(std::move(text)) {
  const std::size_t n = text_.size();

  std::size_t i = 0;
  while (i < n) {
    const auto cls = classify(text_.at(i));
    if (cls == CharClass::Letter) {
      Token tok{i, i, {}, false};
      while (i < n && classify(text_.at(i)) == CharClass::Letter) {
        const char32_t c = text_.at(i);
        if (c >= 'A' && c <= 'Z') {
          tok.norm.push_back(static_cast<char>(c - 'A' + 'a'));
        } else {
          append_utf8(tok.norm, c);
        }
        ++i;
      }
      tok.end = i;
      tokens_.push_back(std::move(tok));
    } else if (cls == CharClass::Digit) {
      Token tok{i, i, {}, true};
      while (i < n) {
        const char32_t c = text_.at(i);
        if (classify(c) == CharClass::Digit) {
          tok.norm.push_back(static_cast<char>(c));
          ++i;
        } else if (c == '.' && i + 1 < n && classify(text_.at(i + 1)) == CharClass::Digit) {
          tok.norm.push_back('.');
          ++i;
        } else {
          break;
        }
      }
      tok.end = i;
      tokens_.push_back(std::move(tok));
    } else if (cls == CharClass::Times) {
      tokens_.push_back({i, i + 1, "x", false});
      ++i;
    } else {
      ++i;
    }
  }

  // Sentence boundaries.
  std::vector<std::size_t> ends;
  for (std::size_t k = 0; k < n; ++k) {
    const char32_t c = text_.at(k);
    if (c == '\n' || ((c == '.' || c == ';') && (k + 1 == n || is_space(text_.at(k + 1))))) ends.push_back(k + 1);
  }
  if (ends.empty() || ends.back() != n) ends.push_back(n);

  std::size_t start = 0;
  std::size_t tok = 0;
  for (std::size_t e : ends) {
    Sentence s;
    s.begin = start;
    s.end = e;
    s.first_token = tok;
    while (tok < tokens_.size() && tokens_[tok].begin < e) ++tok;
    s.last_token = tok;
    if (s.last_token > s.first_token) sentences_.push_back(s);
    start = e;
  }
}

}  // namespace itf
