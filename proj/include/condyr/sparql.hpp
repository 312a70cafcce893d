#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "condyr/algebra.hpp"
#include "condyr/errors.hpp"
#include "condyr/nquads.hpp"
#include "condyr/store.hpp"
#include "condyr/term.hpp"

namespace condyr {

/// Name given to the graph variable shared by all bare triple patterns.
inline constexpr std::string_view kImplicitGraphVariable = "$default";

struct ParseOptions {
  /// IRI that designates the metadata graph in quad patterns.
  std::string metadata_graph_iri = std::string(kDefaultMetadataGraphIri);
};

namespace sparql_detail {

enum class Tok { Iri, PName, Var, String, Integer, LangTag, DoubleCaret, Name, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // IRI body, prefixed name, variable name, unescaped string, ...
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t offset = 0;
  std::size_t length = 0;
};

inline bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         static_cast<unsigned char>(c) >= 0x80;
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = pos_ - line_start_ + 1;
      t.offset = pos_;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      lex_one(t);
      t.length = pos_ - t.offset;
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(line_, pos_ - line_start_ + 1, msg);
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++pos_;
        ++line_;
        line_start_ = pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  void lex_one(Token& t) {
    const char c = text_[pos_];
    if (c == '<') {
      // IRIREF if a matching '>' follows without forbidden characters.
      std::size_t end = pos_ + 1;
      while (end < text_.size()) {
        char d = text_[end];
        if (d == '>' || d == ' ' || d == '\n' || d == '\t' || d == '<' || d == '"' || d == '{' || d == '}' ||
            d == '|' || d == '^' || d == '`')
          break;
        ++end;
      }
      if (end < text_.size() && text_[end] == '>') {
        t.kind = Tok::Iri;
        t.text = std::string(text_.substr(pos_ + 1, end - pos_ - 1));
        pos_ = end + 1;
        return;
      }
      return punct(t, 1);
    }
    if (c == '?' || c == '$') {
      std::size_t start = pos_ + 1, end = start;
      while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_' ||
                                    static_cast<unsigned char>(text_[end]) >= 0x80))
        ++end;
      if (end == start) return punct(t, 1);
      t.kind = Tok::Var;
      t.text = std::string(text_.substr(start, end - start));
      pos_ = end;
      return;
    }
    if (c == '"' || c == '\'') return string(t, c);
    if (c == '@') {
      std::size_t start = ++pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-'))
        ++pos_;
      if (pos_ == start) fail("expected language tag after '@'");
      t.kind = Tok::LangTag;
      t.text = std::string(text_.substr(start, pos_ - start));
      return;
    }
    if (c == '^' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '^') {
      t.kind = Tok::DoubleCaret;
      pos_ += 2;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      t.kind = Tok::Integer;
      t.text = std::string(text_.substr(start, pos_ - start));
      return;
    }
    if (is_name_start(c) || c == ':') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
      if (pos_ < text_.size() && text_[pos_] == ':') {
        ++pos_;
        while (pos_ < text_.size() && (is_name_char(text_[pos_]) || text_[pos_] == '.' || text_[pos_] == ':' ||
                                       text_[pos_] == '%'))
          ++pos_;
        while (text_[pos_ - 1] == '.') --pos_;
        t.kind = Tok::PName;
      } else {
        t.kind = Tok::Name;
      }
      t.text = std::string(text_.substr(start, pos_ - start));
      return;
    }
    punct(t, 1);
  }

  void punct(Token& t, std::size_t n) {
    t.kind = Tok::Punct;
    t.text = std::string(text_.substr(pos_, n));
    pos_ += n;
  }

  void string(Token& t, char quote) {
    ++pos_;
    std::string value;
    while (true) {
      if (pos_ >= text_.size() || text_[pos_] == '\n') fail("unterminated string literal");
      char c = text_[pos_++];
      if (c == quote) break;
      if (c != '\\') {
        value += c;
        continue;
      }
      if (pos_ >= text_.size()) fail("unterminated string literal");
      char e = text_[pos_++];
      switch (e) {
        case 't': value += '\t'; break;
        case 'b': value += '\b'; break;
        case 'n': value += '\n'; break;
        case 'r': value += '\r'; break;
        case 'f': value += '\f'; break;
        case '"': value += '"'; break;
        case '\'': value += '\''; break;
        case '\\': value += '\\'; break;
        case 'u':
        case 'U': {
          std::size_t digits = e == 'u' ? 4 : 8;
          if (pos_ + digits > text_.size()) fail("truncated unicode escape");
          std::uint32_t cp = 0;
          for (std::size_t i = 0; i < digits; ++i) {
            int v = detail::hex_value(text_[pos_ + i]);
            if (v < 0) fail("invalid unicode escape");
            cp = cp * 16 + static_cast<std::uint32_t>(v);
          }
          pos_ += digits;
          detail::append_utf8(value, cp);
          break;
        }
        default: fail(std::string("invalid escape '\\") + e + "'");
      }
    }
    t.kind = Tok::String;
    t.text = std::move(value);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
};

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : tokens_(Lexer(text).run()), options_(options) {}

  AlgebraPtr run() {
    prologue();
    AlgebraPtr result;
    if (is_keyword("SELECT")) {
      result = select_query();
    } else if (is_keyword("CONSTRUCT") || is_keyword("ASK") || is_keyword("DESCRIBE")) {
      unsupported(upper(peek().text) + " queries");
    } else {
      // Bare pattern block, optionally braced.
      bool braced = is_punct("{");
      if (braced) advance();
      auto pats = group_body(braced ? "}" : "");
      if (braced) expect_punct("}");
      result = join_left_deep(pats);
    }
    if (peek().kind != Tok::End) {
      check_unsupported_keyword();
      syntax("unexpected '" + peek().text + "'");
    }
    return result;
  }

  /// Prefixed names replaced by absolute IRIs, everything else untouched.
  std::string expand(std::string_view text) {
    std::string out;
    std::size_t copied = 0;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      const Token& t = tokens_[i];
      if (t.kind == Tok::Name && upper(t.text) == "PREFIX" && i + 2 < tokens_.size() &&
          tokens_[i + 1].kind == Tok::PName && tokens_[i + 2].kind == Tok::Iri) {
        declare(tokens_[i + 1], tokens_[i + 2].text);
        i += 2;
        continue;
      }
      if (t.kind != Tok::PName || t.text.rfind("_:", 0) == 0) continue;
      out += text.substr(copied, t.offset - copied);
      out += "<" + resolve(t) + ">";
      copied = t.offset + t.length;
    }
    out += text.substr(copied);
    return out;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
  const Token& advance() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Name && upper(peek(ahead).text) == kw;
  }
  bool is_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }

  [[noreturn]] void syntax(const std::string& msg) const {
    throw SyntaxError(peek().line, peek().column, msg);
  }
  [[noreturn]] void unsupported(const std::string& feature) const {
    throw UnsupportedFeature(peek().line, peek().column, feature);
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(p)) syntax("expected '" + std::string(p) + "'" + found());
    advance();
  }
  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw)) syntax("expected " + std::string(kw) + found());
    advance();
  }
  std::string found() const {
    return peek().kind == Tok::End ? " but reached end of query" : " but found '" + peek().text + "'";
  }

  void check_unsupported_keyword() const {
    static const std::vector<std::pair<std::string_view, std::string_view>> kFeatures = {
        {"FILTER", "FILTER"},   {"OPTIONAL", "OPTIONAL"}, {"UNION", "UNION"},       {"MINUS", "MINUS"},
        {"BIND", "BIND"},       {"VALUES", "VALUES"},     {"SERVICE", "SERVICE"},   {"ORDER", "ORDER BY"},
        {"LIMIT", "LIMIT"},     {"OFFSET", "OFFSET"},     {"HAVING", "HAVING"},     {"DISTINCT", "DISTINCT"},
        {"REDUCED", "REDUCED"}, {"FROM", "FROM"},         {"BASE", "BASE"},         {"SELECT", "subqueries"},
        {"EXISTS", "EXISTS"},   {"CONSTRUCT", "CONSTRUCT queries"}};
    if (peek().kind != Tok::Name) return;
    const auto kw = upper(peek().text);
    for (const auto& [word, feature] : kFeatures)
      if (kw == word) unsupported(std::string(feature));
  }

  void declare(const Token& pname, const std::string& iri) {
    if (pname.text.back() != ':') throw SyntaxError(pname.line, pname.column, "prefix declaration must end in ':'");
    prefixes_[pname.text.substr(0, pname.text.size() - 1)] = iri;
  }

  std::string resolve(const Token& t) const {
    auto colon = t.text.find(':');
    auto prefix = t.text.substr(0, colon);
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) throw UndefinedPrefix(t.line, t.column, prefix);
    return it->second + t.text.substr(colon + 1);
  }

  void prologue() {
    while (true) {
      if (is_keyword("PREFIX")) {
        advance();
        if (peek().kind != Tok::PName) syntax("expected prefix name" + found());
        Token name = advance();
        if (peek().kind != Tok::Iri) syntax("expected IRI" + found());
        declare(name, advance().text);
      } else if (is_keyword("BASE")) {
        unsupported("BASE");
      } else {
        return;
      }
    }
  }

  AlgebraPtr select_query() {
    advance();  // SELECT
    if (is_keyword("DISTINCT") || is_keyword("REDUCED")) unsupported(upper(peek().text));

    bool star = false;
    std::vector<std::string> projected;
    std::vector<Aggregate> aggregates;
    if (is_punct("*")) {
      advance();
      star = true;
    } else {
      while (true) {
        if (peek().kind == Tok::Var) {
          projected.push_back(advance().text);
        } else if (is_punct("(")) {
          aggregates.push_back(aggregate());
          projected.push_back(aggregates.back().alias);
        } else {
          break;
        }
      }
      if (projected.empty()) {
        check_unsupported_keyword();
        syntax("expected projection" + found());
      }
    }

    if (is_keyword("FROM")) unsupported("FROM");
    if (is_keyword("WHERE")) advance();
    expect_punct("{");
    auto pats = group_body("}");
    expect_punct("}");
    AlgebraPtr tree = join_left_deep(pats);

    std::vector<std::string> keys;
    if (is_keyword("GROUP")) {
      advance();
      expect_keyword("BY");
      while (peek().kind == Tok::Var) keys.push_back(advance().text);
      if (keys.empty()) {
        if (is_punct("(")) unsupported("GROUP BY expressions");
        syntax("expected variable after GROUP BY" + found());
      }
    }
    check_unsupported_keyword();

    const bool grouped = !keys.empty() || !aggregates.empty();
    if (star) {
      if (grouped) syntax("SELECT * cannot be combined with GROUP BY");
      projected = visible_variables(*tree);
    }
    if (grouped) tree = make_group(tree, std::move(keys), std::move(aggregates));
    return make_project(tree, std::move(projected));
  }

  Aggregate aggregate() {
    expect_punct("(");
    if (peek().kind != Tok::Name) syntax("expected aggregate" + found());
    const auto fn = upper(peek().text);
    if (fn != "COUNT") {
      if (fn == "SUM" || fn == "MIN" || fn == "MAX" || fn == "AVG" || fn == "SAMPLE" || fn == "GROUP_CONCAT")
        unsupported("aggregate " + fn);
      unsupported("expressions in SELECT");
    }
    advance();
    expect_punct("(");
    if (is_keyword("DISTINCT")) unsupported("COUNT(DISTINCT ...)");
    Aggregate agg;
    if (is_punct("*")) {
      advance();
    } else if (peek().kind == Tok::Var) {
      agg.argument = advance().text;
    } else {
      syntax("expected variable or '*' in COUNT" + found());
    }
    expect_punct(")");
    expect_keyword("AS");
    if (peek().kind != Tok::Var) syntax("expected alias variable" + found());
    agg.alias = advance().text;
    expect_punct(")");
    return agg;
  }

  std::vector<QuadPattern> group_body(std::string_view closer) {
    std::vector<QuadPattern> out;
    while (true) {
      if (peek().kind == Tok::End || (!closer.empty() && is_punct(closer))) return out;
      check_unsupported_keyword();
      if (is_keyword("GRAPH")) {
        advance();
        GraphTerm g = graph_term();
        expect_punct("{");
        while (!is_punct("}")) {
          if (peek().kind == Tok::End) syntax("unterminated GRAPH block");
          check_unsupported_keyword();
          if (is_keyword("GRAPH")) unsupported("nested GRAPH");
          statement(out, g, /*allow_quad=*/false);
        }
        advance();
        if (is_punct(".")) advance();
        continue;
      }
      if (is_punct("{")) unsupported("nested group patterns");
      statement(out, std::nullopt, /*allow_quad=*/true);
    }
  }

  /// subject predicate object [graph] ( ',' object | ';' predicate object )* '.'?
  void statement(std::vector<QuadPattern>& out, const std::optional<GraphTerm>& graph, bool allow_quad) {
    PatternTerm s = term("subject");
    PatternTerm p = predicate();
    PatternTerm o = term("object");
    std::vector<std::pair<PatternTerm, PatternTerm>> po = {{p, o}};
    std::optional<GraphTerm> inline_graph;
    while (true) {
      if (is_punct(",")) {
        advance();
        po.push_back({po.back().first, term("object")});
      } else if (is_punct(";")) {
        advance();
        if (is_punct(".") || is_punct("}")) break;
        PatternTerm p2 = predicate();
        po.push_back({p2, term("object")});
      } else {
        break;
      }
    }
    if (!is_punct(".") && !is_punct("}") && peek().kind != Tok::End) {
      check_unsupported_keyword();
      if (!allow_quad || po.size() != 1) syntax("expected '.'" + found());
      inline_graph = graph_term();
    }
    if (is_punct(".")) advance();
    else if (!is_punct("}") && peek().kind != Tok::End) syntax("expected '.'" + found());

    GraphTerm g = inline_graph   ? *inline_graph
                  : graph        ? *graph
                                 : GraphTerm(Variable{std::string(kImplicitGraphVariable)});
    if (auto* gv = std::get_if<Variable>(&g)) {
      auto reuses = [&](const PatternTerm& t) {
        auto* v = std::get_if<Variable>(&t);
        return v && v->name == gv->name;
      };
      bool clash = reuses(s);
      for (auto& [pp, oo] : po) clash = clash || reuses(pp) || reuses(oo);
      if (clash) unsupported("graph variable ?" + gv->name + " reused inside its own quad pattern");
    }
    for (auto& [pp, oo] : po) out.push_back(QuadPattern{s, pp, oo, g});
  }

  PatternTerm predicate() {
    if (peek().kind == Tok::Name && peek().text == "a") {
      advance();
      check_path();
      return Term::iri(std::string(kRdfType));
    }
    if (is_punct("^") || is_punct("!") || is_punct("(")) unsupported("property paths");
    PatternTerm p = term("predicate");
    if (auto* t = std::get_if<Term>(&p); t && !t->is_iri()) syntax("predicate must be an IRI or variable");
    check_path();
    return p;
  }

  void check_path() const {
    if (peek().kind == Tok::Punct &&
        (peek().text == "/" || peek().text == "|" || peek().text == "*" || peek().text == "+" ||
         peek().text == "?" || peek().text == "^"))
      unsupported("property paths");
  }

  PatternTerm term(std::string_view role) {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Var: return Variable{advance().text};
      case Tok::Iri: return Term::iri(advance().text);
      case Tok::PName:
        if (t.text.rfind("_:", 0) == 0) unsupported("blank nodes in patterns");
        return Term::iri(resolve(advance()));
      case Tok::Integer: return Term::typed(advance().text, std::string(kXsdInteger));
      case Tok::String: {
        std::string lex = advance().text;
        if (peek().kind == Tok::LangTag) return Term::lang_string(std::move(lex), advance().text);
        if (peek().kind == Tok::DoubleCaret) {
          advance();
          if (peek().kind == Tok::Iri) return Term::typed(std::move(lex), advance().text);
          if (peek().kind == Tok::PName) return Term::typed(std::move(lex), resolve(advance()));
          syntax("expected datatype IRI" + found());
        }
        return Term::literal(std::move(lex));
      }
      case Tok::Name:
        if (upper(t.text) == "TRUE" || upper(t.text) == "FALSE") unsupported("boolean literals");
        check_unsupported_keyword();
        syntax("expected " + std::string(role) + found());
      case Tok::Punct:
        if (t.text == "[") unsupported("blank nodes in patterns");
        if (t.text == "(") unsupported("RDF collections");
        syntax("expected " + std::string(role) + found());
      default: syntax("expected " + std::string(role) + found());
    }
  }

  GraphTerm graph_term() {
    const Token& t = peek();
    if (t.kind == Tok::Var) return Variable{advance().text};
    std::string iri;
    if (t.kind == Tok::Iri) iri = advance().text;
    else if (t.kind == Tok::PName && t.text.rfind("_:", 0) != 0) iri = resolve(advance());
    else syntax("expected graph IRI or variable" + found());
    if (iri == options_.metadata_graph_iri) return MetadataGraph{};
    return Term::iri(std::move(iri));
  }

  AlgebraPtr join_left_deep(const std::vector<QuadPattern>& pats) const {
    if (pats.empty()) syntax("empty graph pattern");
    AlgebraPtr tree = make_pattern(pats.front());
    for (std::size_t i = 1; i < pats.size(); ++i) tree = make_join(tree, make_pattern(pats[i]));
    return tree;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  ParseOptions options_;
  std::map<std::string, std::string> prefixes_;
};

}  // namespace sparql_detail

/// Parses a query of the supported subset into an algebra tree.
///
/// Accepts SELECT queries (projection or COUNT aggregates, optional
/// GROUP BY) as well as a bare block of patterns. Patterns may be written
/// inside GRAPH blocks or in the inline four-term form "s p o g .".
inline AlgebraPtr parse(std::string_view query, const ParseOptions& options = {}) {
  return sparql_detail::Parser(query, options).run();
}

/// Replaces every prefixed name with its absolute IRI in angle brackets.
inline std::string expand_prefixes(std::string_view query) {
  return sparql_detail::Parser(query, {}).expand(query);
}

}  // namespace condyr
