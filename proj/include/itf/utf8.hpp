#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace itf {

/// UTF-8 text addressed by Unicode scalar-value offsets.
///
/// Annotation offsets count code points, not bytes, so a span over "1.3 × 0.9 cm"
/// has the same coordinates regardless of how the multiplication sign is encoded.
class Utf8Text {
 public:
  /// Throws std::invalid_argument on malformed UTF-8.
  explicit Utf8Text(std::string text);

  const std::string& str() const noexcept { return text_; }
  std::size_t size() const noexcept { return code_points_.size(); }
  char32_t at(std::size_t cp) const { return code_points_.at(cp); }
  std::size_t byte_offset(std::size_t cp) const { return byte_offsets_.at(cp); }

  /// Code points [begin, end) as UTF-8. Throws std::out_of_range.
  std::string slice(std::size_t begin, std::size_t end) const;

 private:
  std::string text_;
  std::vector<char32_t> code_points_;
  std::vector<std::size_t> byte_offsets_;  // size() + 1 entries
};

/// Number of code points in valid UTF-8; throws std::invalid_argument otherwise.
std::size_t utf8_length(std::string_view text);

void append_utf8(std::string& out, char32_t cp);

}  // namespace itf
