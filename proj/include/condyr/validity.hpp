#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace condyr {

/// Fixed-length version bitstring.
///
/// Position 0 is the leftmost character of the printed form and stands for
/// version 1; "010" means "present in version 2 only".
class Validity {
 public:
  Validity() = default;
  explicit Validity(std::size_t length) : words_((length + 63) / 64, 0), size_(length) {}

  static Validity from_string(std::string_view bits) {
    Validity v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == '1') v.set(i);
      else if (bits[i] != '0') throw std::invalid_argument("bitstring must contain only '0' and '1'");
    }
    return v;
  }

  /// Bitstring of `length` with only the bit of 1-based `version` set.
  static Validity single(std::size_t length, std::size_t version) {
    Validity v(length);
    v.set(version - 1);
    return v;
  }

  std::size_t size() const noexcept { return size_; }

  bool test(std::size_t pos) const noexcept {
    assert(pos < size_);
    return (words_[pos / 64] >> (pos % 64)) & 1U;
  }
  void set(std::size_t pos) noexcept {
    assert(pos < size_);
    words_[pos / 64] |= std::uint64_t{1} << (pos % 64);
  }
  void reset(std::size_t pos) noexcept {
    assert(pos < size_);
    words_[pos / 64] &= ~(std::uint64_t{1} << (pos % 64));
  }

  /// Appends `n` zero bits on the right (new, later versions).
  void extend(std::size_t n = 1) {
    size_ += n;
    words_.resize((size_ + 63) / 64, 0);
  }

  std::size_t popcount() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }
  bool none() const noexcept {
    for (auto w : words_)
      if (w != 0) return false;
    return true;
  }
  bool any() const noexcept { return !none(); }

  Validity& operator&=(const Validity& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  Validity& operator|=(const Validity& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  friend Validity operator&(Validity a, const Validity& b) { return a &= b; }
  friend Validity operator|(Validity a, const Validity& b) { return a |= b; }

  /// 0-based positions of set bits, ascending.
  std::vector<std::size_t> set_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      auto word = words_[w];
      while (word) {
        out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(word)));
        word &= word - 1;
      }
    }
    return out;
  }

  std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i)
      if (test(i)) s[i] = '1';
    return s;
  }

  friend bool operator==(const Validity&, const Validity&) = default;

 private:
  void check_same_size(const Validity& o) const {
    if (o.size_ != size_) throw std::invalid_argument("bitstring length mismatch");
  }

  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const Validity& v) { return os << v.to_string(); }

}  // namespace condyr
