#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "condyr/errors.hpp"
#include "condyr/term.hpp"

namespace condyr {

/// FNV-1a 64 over a canonical encoding of the term. Used as the `digest`
/// column of the exported dictionary relation.
inline std::uint64_t term_digest(const Term& t) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  feed(std::string_view("IRB").substr(static_cast<std::size_t>(t.kind), 1));
  feed(t.lexical);
  feed(t.datatype ? *t.datatype : std::string_view{});
  feed(t.lang ? *t.lang : std::string_view{});
  return h;
}

inline std::string digest_hex(std::uint64_t d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, d >>= 4) out[static_cast<std::size_t>(i)] = kHex[d & 0xf];
  return out;
}

/// Bidirectional term <-> id mapping (the `resource_or_literal` relation).
///
/// Ids are dense, start at 1 and are never reused. Interning takes an
/// exclusive lock; lookups and resolves share a reader lock.
class Dictionary {
 public:
  Dictionary() = default;
  Dictionary(const Dictionary& o) {
    std::shared_lock lock(o.mutex_);
    terms_ = o.terms_;
    index_ = o.index_;
  }
  Dictionary(Dictionary&& o) noexcept {
    std::unique_lock lock(o.mutex_);
    terms_ = std::move(o.terms_);
    index_ = std::move(o.index_);
  }
  Dictionary& operator=(Dictionary o) noexcept {
    std::unique_lock lock(mutex_);
    terms_ = std::move(o.terms_);
    index_ = std::move(o.index_);
    return *this;
  }

  TermId intern(const Term& term) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = index_.find(term); it != index_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    if (auto it = index_.find(term); it != index_.end()) return it->second;
    TermId id(static_cast<std::uint32_t>(terms_.size() + 1));
    terms_.push_back(term);
    index_.emplace(term, id);
    return id;
  }

  std::optional<TermId> lookup(const Term& term) const {
    std::shared_lock lock(mutex_);
    if (auto it = index_.find(term); it != index_.end()) return it->second;
    return std::nullopt;
  }

  /// Throws UnknownIdError for ids that were never issued.
  Term resolve(TermId id) const {
    std::shared_lock lock(mutex_);
    if (!id.valid() || id.value > terms_.size()) throw UnknownIdError(id.value);
    return terms_[id.value - 1];
  }

  bool contains(TermId id) const noexcept {
    std::shared_lock lock(mutex_);
    return id.valid() && id.value <= terms_.size();
  }

  std::size_t size() const noexcept {
    std::shared_lock lock(mutex_);
    return terms_.size();
  }

  /// Terms in id order; element i has id i + 1.
  const std::vector<Term>& terms() const noexcept { return terms_; }

  friend bool operator==(const Dictionary& a, const Dictionary& b) { return a.terms_ == b.terms_; }

 private:
  mutable std::shared_mutex mutex_;
  std::vector<Term> terms_;
  std::unordered_map<Term, TermId> index_;
};

}  // namespace condyr
