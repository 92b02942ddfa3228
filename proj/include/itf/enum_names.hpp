#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace itf {

/// Specialize with `static constexpr std::array<std::string_view, N> names` listing
/// the enumerators in declaration order.
template <typename E>
struct EnumNames;

template <typename E>
constexpr std::string_view to_string(E value) {
  return EnumNames<E>::names[static_cast<std::size_t>(value)];
}

template <typename E>
constexpr std::optional<E> enum_from_string(std::string_view name) {
  const auto& names = EnumNames<E>::names;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<E>(i);
  }
  return std::nullopt;
}

template <typename E>
constexpr std::size_t enum_count() {
  return EnumNames<E>::names.size();
}

}  // namespace itf
