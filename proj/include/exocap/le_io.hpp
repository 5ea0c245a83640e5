#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <type_traits>
#include <vector>

namespace exocap::le {

template <typename T>
  requires std::is_arithmetic_v<T>
void put(std::vector<std::byte>& out, T value) {
  auto raw = std::bit_cast<std::array<std::byte, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw.begin(), raw.end());
  }
  out.insert(out.end(), raw.begin(), raw.end());
}

template <typename T>
  requires std::is_arithmetic_v<T>
T get(std::span<const std::byte> in, std::size_t offset) {
  std::array<std::byte, sizeof(T)> raw{};
  std::memcpy(raw.data(), in.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw.begin(), raw.end());
  }
  return std::bit_cast<T>(raw);
}

}  // namespace exocap::le
