#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace condyr {

enum class TermKind : std::uint8_t { Iri, Literal, Blank };

/// An RDF resource or literal as stored in the dictionary.
///
/// Equality is structural over all four fields. IRIs and blank nodes never
/// carry a datatype or language tag.
struct Term {
  std::string lexical;
  TermKind kind = TermKind::Iri;
  std::optional<std::string> datatype;
  std::optional<std::string> lang;

  static Term iri(std::string value) { return Term{std::move(value), TermKind::Iri, {}, {}}; }
  static Term blank(std::string label) { return Term{std::move(label), TermKind::Blank, {}, {}}; }
  static Term literal(std::string value) { return Term{std::move(value), TermKind::Literal, {}, {}}; }
  static Term typed(std::string value, std::string datatype) {
    return Term{std::move(value), TermKind::Literal, std::move(datatype), {}};
  }
  static Term lang_string(std::string value, std::string tag) {
    return Term{std::move(value), TermKind::Literal, {}, std::move(tag)};
  }

  bool is_iri() const noexcept { return kind == TermKind::Iri; }
  bool is_literal() const noexcept { return kind == TermKind::Literal; }
  bool is_blank() const noexcept { return kind == TermKind::Blank; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;
};

/// Dictionary-assigned identifier of a Term. Zero is never issued.
struct TermId {
  std::uint32_t value = 0;

  constexpr TermId() = default;
  constexpr explicit TermId(std::uint32_t v) : value(v) {}

  constexpr bool valid() const noexcept { return value != 0; }
  friend constexpr bool operator==(TermId, TermId) = default;
  friend constexpr auto operator<=>(TermId, TermId) = default;
};

inline std::ostream& operator<<(std::ostream& os, TermId id) { return os << '#' << id.value; }

/// Escapes a string with the N-Quads ECHAR rules (\t \b \n \r \f \" \' \\).
inline std::string escape_string(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (char c : in) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\f': out += "\\f"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

/// N-Triples rendering: <iri>, _:label, "lex", "lex"@lang, "lex"^^<dt>.
inline std::string to_ntriples(const Term& t) {
  switch (t.kind) {
    case TermKind::Iri: return "<" + t.lexical + ">";
    case TermKind::Blank: return "_:" + t.lexical;
    case TermKind::Literal: {
      std::string out = "\"" + escape_string(t.lexical) + "\"";
      if (t.lang) out += "@" + *t.lang;
      else if (t.datatype) out += "^^<" + *t.datatype + ">";
      return out;
    }
  }
  return {};
}

inline std::ostream& operator<<(std::ostream& os, const Term& t) { return os << to_ntriples(t); }

/// A quad of terms as read from N-Quads; the graph is mandatory.
struct TermQuad {
  Term subject;
  Term predicate;
  Term object;
  Term graph;

  friend bool operator==(const TermQuad&, const TermQuad&) = default;
  friend auto operator<=>(const TermQuad&, const TermQuad&) = default;
};

inline constexpr std::string_view kXsdInteger = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

}  // namespace condyr

template <>
struct std::hash<condyr::TermId> {
  std::size_t operator()(condyr::TermId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

template <>
struct std::hash<condyr::Term> {
  std::size_t operator()(const condyr::Term& t) const noexcept {
    std::size_t h = std::hash<std::string>{}(t.lexical);
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(static_cast<std::size_t>(t.kind));
    if (t.datatype) mix(std::hash<std::string>{}(*t.datatype) ^ 0x1);
    if (t.lang) mix(std::hash<std::string>{}(*t.lang) ^ 0x2);
    return h;
  }
};
