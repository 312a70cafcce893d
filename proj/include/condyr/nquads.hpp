#pragma once

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "condyr/errors.hpp"
#include "condyr/term.hpp"

namespace condyr {

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

inline int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

/// Inverse of escape_string. Returns false on a malformed escape.
inline bool unescape_string(std::string_view in, std::string& out) {
  out.clear();
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] != '\\') {
      out += in[i];
      continue;
    }
    if (++i >= in.size()) return false;
    switch (in[i]) {
      case 't': out += '\t'; break;
      case 'b': out += '\b'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 'f': out += '\f'; break;
      case '"': out += '"'; break;
      case '\'': out += '\''; break;
      case '\\': out += '\\'; break;
      default: return false;
    }
  }
  return true;
}

/// Cursor over one line of N-Quads text.
class NQuadsLine {
 public:
  NQuadsLine(std::string_view text, std::size_t line, std::string_view blank_scope)
      : text_(text), line_(line), blank_scope_(blank_scope) {}

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size() || text_[pos_] == '#';
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  Term term() {
    switch (peek()) {
      case '<': return Term::iri(iri());
      case '_': return blank();
      case '"': return literal();
      default: fail("expected IRI, blank node or literal");
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw NQuadsError(line_, pos_ + 1, msg); }

 private:
  std::uint32_t read_hex(std::size_t digits) {
    if (pos_ + digits > text_.size()) fail("truncated unicode escape");
    std::uint32_t cp = 0;
    for (std::size_t i = 0; i < digits; ++i) {
      int v = hex_value(text_[pos_ + i]);
      if (v < 0) fail("invalid hex digit in unicode escape");
      cp = cp * 16 + static_cast<std::uint32_t>(v);
    }
    pos_ += digits;
    return cp;
  }

  std::string iri() {
    ++pos_;  // '<'
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated IRI");
      char c = text_[pos_++];
      if (c == '>') break;
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("truncated escape in IRI");
        char e = text_[pos_++];
        if (e == 'u') append_utf8(out, read_hex(4));
        else if (e == 'U') append_utf8(out, read_hex(8));
        else fail("invalid escape in IRI");
        continue;
      }
      if (c == ' ' || c == '<' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' || c == '`')
        fail("invalid character in IRI");
      out += c;
    }
    if (out.empty()) fail("empty IRI");
    return out;
  }

  Term blank() {
    if (text_.substr(pos_, 2) != "_:") fail("expected '_:'");
    pos_ += 2;
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
                static_cast<unsigned char>(c) >= 0x80;
      if (!ok) break;
      ++pos_;
    }
    // A trailing '.' terminates the statement rather than the label.
    while (pos_ > start && text_[pos_ - 1] == '.') --pos_;
    if (pos_ == start) fail("empty blank node label");
    return Term::blank(std::string(blank_scope_) + std::string(text_.substr(start, pos_ - start)));
  }

  Term literal() {
    ++pos_;  // '"'
    std::string lex;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated string literal");
      char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("truncated escape");
        char e = text_[pos_++];
        switch (e) {
          case 't': lex += '\t'; break;
          case 'b': lex += '\b'; break;
          case 'n': lex += '\n'; break;
          case 'r': lex += '\r'; break;
          case 'f': lex += '\f'; break;
          case '"': lex += '"'; break;
          case '\'': lex += '\''; break;
          case '\\': lex += '\\'; break;
          case 'u': append_utf8(lex, read_hex(4)); break;
          case 'U': append_utf8(lex, read_hex(8)); break;
          default: fail(std::string("invalid escape '\\") + e + "'");
        }
        continue;
      }
      lex += c;
    }
    if (pos_ < text_.size() && text_[pos_] == '@') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-'))
        ++pos_;
      if (pos_ == start) fail("empty language tag");
      return Term::lang_string(std::move(lex), std::string(text_.substr(start, pos_ - start)));
    }
    if (text_.substr(pos_, 2) == "^^") {
      pos_ += 2;
      if (pos_ >= text_.size() || text_[pos_] != '<') fail("expected datatype IRI");
      return Term::typed(std::move(lex), iri());
    }
    return Term::literal(std::move(lex));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::string_view blank_scope_;
};

}  // namespace detail

struct NQuadsOptions {
  /// Prepended to every blank node label, making labels file-scoped.
  std::string blank_scope;
};

/// Parses N-Quads text. Every statement must carry a graph label.
inline std::vector<TermQuad> parse_nquads(std::string_view text, const NQuadsOptions& options = {}) {
  std::vector<TermQuad> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    detail::NQuadsLine line(text.substr(start, end - start), line_no, options.blank_scope);
    if (!line.at_end()) {
      TermQuad q;
      q.subject = line.term();
      if (q.subject.is_literal()) line.fail("literal in subject position");
      q.predicate = line.term();
      if (!q.predicate.is_iri()) line.fail("predicate must be an IRI");
      q.object = line.term();
      if (line.peek() == '.') line.fail("missing graph label (triples are not accepted)");
      q.graph = line.term();
      if (q.graph.is_literal()) line.fail("literal in graph position");
      line.expect('.');
      if (!line.at_end()) line.fail("trailing content after '.'");
      out.push_back(std::move(q));
    }
    start = end + 1;
  }
  return out;
}

inline std::vector<TermQuad> parse_nquads(std::istream& in, const NQuadsOptions& options = {}) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_nquads(buf.str(), options);
}

inline std::string to_nquads(const TermQuad& q) {
  return to_ntriples(q.subject) + " " + to_ntriples(q.predicate) + " " + to_ntriples(q.object) + " " +
         to_ntriples(q.graph) + " .";
}

}  // namespace condyr
