#include "itf/utf8.hpp"

#include <stdexcept>

namespace itf {
namespace {

// Decodes one scalar value starting at `pos`; advances `pos`.
char32_t decode(std::string_view s, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(s[pos]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    throw std::invalid_argument("invalid UTF-8 lead byte");
  }
  if (pos + len > s.size()) throw std::invalid_argument("truncated UTF-8 sequence");
  for (std::size_t i = 1; i < len; ++i) {
    const auto c = static_cast<unsigned char>(s[pos + i]);
    if ((c & 0xC0) != 0x80) throw std::invalid_argument("invalid UTF-8 continuation byte");
    cp = (cp << 6) | (c & 0x3F);
  }
  static constexpr char32_t min_for_len[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    throw std::invalid_argument("invalid UTF-8 scalar value");
  }
  pos += len;
  return cp;
}

}  // namespace

Utf8Text::Utf8Text(std::string text) : text_(std::move(text)) {
  std::size_t pos = 0;
  code_points_.reserve(text_.size());
  byte_offsets_.reserve(text_.size() + 1);
  while (pos < text_.size()) {
    byte_offsets_.push_back(pos);
    code_points_.push_back(decode(text_, pos));
  }
  byte_offsets_.push_back(text_.size());
}

std::string Utf8Text::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw std::out_of_range("code point slice out of range");
  return text_.substr(byte_offsets_[begin], byte_offsets_[end] - byte_offsets_[begin]);
}

std::size_t utf8_length(std::string_view text) {
  std::size_t pos = 0;
  std::size_t n = 0;
  while (pos < text.size()) {
    decode(text, pos);
    ++n;
  }
  return n;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace itf
