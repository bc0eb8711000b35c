#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mlrules {

/// Fixed-size dense bitset used for instance coverage sets.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t size, bool value = false)
      : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0) {
    trim();
  }

  std::size_t size() const noexcept { return size_; }

  bool test(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool any() const noexcept {
    for (auto w : words_) {
      if (w != 0) return true;
    }
    return false;
  }

  /// |a & b|
  static std::size_t count_and(const Bitset& a, const Bitset& b) noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i) {
      n += static_cast<std::size_t>(std::popcount(a.words_[i] & b.words_[i]));
    }
    return n;
  }

  /// |a & b & c|
  static std::size_t count_and(const Bitset& a, const Bitset& b, const Bitset& c) noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i) {
      n += static_cast<std::size_t>(std::popcount(a.words_[i] & b.words_[i] & c.words_[i]));
    }
    return n;
  }

  Bitset& operator&=(const Bitset& other) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }
  Bitset& operator|=(const Bitset& other) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }
  /// this &= ~other
  Bitset& subtract(const Bitset& other) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
    return *this;
  }
  Bitset operator~() const {
    Bitset out = *this;
    for (auto& w : out.words_) w = ~w;
    out.trim();
    return out;
  }

  bool operator==(const Bitset&) const = default;

 private:
  void trim() noexcept {
    if (size_ % 64 != 0 && !words_.empty()) {
      words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace mlrules
