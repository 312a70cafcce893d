#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "condyr/dictionary.hpp"
#include "condyr/errors.hpp"
#include "condyr/plan.hpp"
#include "condyr/store.hpp"

namespace condyr {

struct SqlOptions {
  /// Compare against resolved dictionary ids instead of lookup subqueries.
  bool inline_ids = false;
};

/// Emitted statement plus its output column names, in order.
struct SqlFragment {
  std::string text;
  std::vector<std::string> columns;
};

inline std::string sql_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

inline std::string_view sql_term_type(TermKind kind) {
  switch (kind) {
    case TermKind::Iri: return "resource";
    case TermKind::Literal: return "literal";
    case TermKind::Blank: return "blank";
  }
  return "resource";
}

namespace detail {

struct SqlColumn {
  std::string expr;
  std::string name;
};

/// A SELECT ... FROM ... WHERE block that joins can still merge into.
struct SqlBlock {
  std::vector<std::string> from;
  /// `bit_count(...) <> 0` guards keyed by the bs$ column they protect.
  std::vector<std::pair<std::string, std::string>> guards;
  std::vector<std::string> conditions;
  std::vector<SqlColumn> columns;

  const SqlColumn& column(const std::string& name) const {
    for (const auto& c : columns)
      if (c.name == name) return c;
    throw Error("no SQL column " + name);
  }
};

inline std::string indent_lines(const std::string& text, std::size_t n) {
  std::string pad(n, ' ');
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    out += pad + text.substr(start, end - start);
    if (end < text.size()) out += '\n';
    start = end + 1;
  }
  return out;
}

inline std::string render_block(const SqlBlock& b, const std::vector<std::string>* as_names = nullptr) {
  std::string out = "SELECT ";
  for (std::size_t i = 0; i < b.columns.size(); ++i) {
    if (i) out += ", ";
    const bool upper = as_names && (*as_names)[i] != b.columns[i].name;
    out += b.columns[i].expr + (upper ? " AS " + (*as_names)[i] : " as " + b.columns[i].name);
  }
  out += "\nFROM ";
  for (std::size_t i = 0; i < b.from.size(); ++i) out += (i ? ", " : "") + b.from[i];
  bool first = true;
  auto clause = [&](const std::string& c) {
    out += first ? "\nWHERE " : "\nAND ";
    out += c;
    first = false;
  };
  for (const auto& g : b.guards) clause(g.second);
  for (const auto& c : b.conditions) clause(c);
  return out;
}

class SqlEmitter {
 public:
  explicit SqlEmitter(const SqlOptions& options) : options_(options) {}

  SqlFragment emit(const PlanNode& plan) {
    next_alias_ = 0;
    if (auto* fin = std::get_if<FinalizeOp>(&plan.op)) {
      SqlBlock inner = block(*fin->sub);
      SqlBlock out = inner;
      out.columns.clear();
      std::vector<std::string> names;
      const auto sub_cols = physical_columns(fin->sub->schema);
      for (const auto& pc : physical_columns(plan.schema)) {
        std::string source = pc.name;
        if (pc.kind == CellKind::Count)
          for (const auto& sc : sub_cols)
            if (sc.var == pc.var) source = sc.name;
        out.columns.push_back(inner.column(source));
        names.push_back(pc.name);
      }
      return {render_block(out, &names) + "\n", names};
    }
    SqlBlock b = block(plan);
    std::vector<std::string> names;
    for (const auto& c : b.columns) names.push_back(c.name);
    return {render_block(b) + "\n", names};
  }

 private:
  std::string alias() { return "t" + std::to_string(next_alias_++); }

  SqlBlock block(const PlanNode& node) {
    if (auto* scan = std::get_if<ScanOp>(&node.op)) return scan_block(*scan, node.schema);
    if (auto* join = std::get_if<BitJoinOp>(&node.op)) return join_block(*join);
    if (auto* lower = std::get_if<LowerOp>(&node.op)) return lower_block(*lower);
    if (auto* group = std::get_if<GroupByOp>(&node.op)) return group_block(*group, node.schema);
    throw Error("Finalize is only valid at the plan root");
  }

  std::string term_value(const std::optional<Term>& term, const std::optional<TermId>& id) {
    if (options_.inline_ids) return id ? std::to_string(id->value) : "NULL";
    const Term& t = *term;
    std::string q = "(SELECT id_resource_or_literal FROM resource_or_literal WHERE digest = " +
                    sql_quote(digest_hex(term_digest(t))) + " AND name = " + sql_quote(t.lexical) +
                    " AND type = " + sql_quote(sql_term_type(t.kind));
    if (t.is_literal()) {
      q += t.datatype ? " AND datatype = " + sql_quote(*t.datatype) : std::string(" AND datatype IS NULL");
      q += t.lang ? " AND lang = " + sql_quote(*t.lang) : std::string(" AND lang IS NULL");
    }
    return q + ")";
  }

  SqlBlock scan_block(const ScanOp& scan, const Schema& schema) {
    static const char* kCols[4] = {"id_subject", "id_predicate", "id_object", "id_named_graph"};
    const std::string t = alias();
    const bool quads = scan.source == ScanSource::Quads;
    SqlBlock b;
    b.from.push_back(std::string(quads ? "versioned_quad " : "metadata ") + t);
    if (quads) b.guards.emplace_back("", "bit_count(" + t + ".validity) <> 0");

    for (const auto& c : schema) {
      std::size_t pos = 0;
      while (scan.vars[pos] != c.var) ++pos;
      const std::string col = t + "." + kCols[pos];
      if (c.repr == Repr::Condensed) {
        b.columns.push_back({col, c.ng_column()});
        b.columns.push_back({t + ".validity", c.bs_column()});
        b.guards.back().first = c.bs_column();
      } else {
        b.columns.push_back({col, c.id_column()});
      }
      for (std::size_t j = pos + 1; j < 4; ++j)
        if (scan.vars[j] == c.var) b.conditions.push_back(col + " = " + t + "." + kCols[j]);
    }
    if (scan.empty && options_.inline_ids) b.conditions.push_back("FALSE");
    for (std::size_t i = 0; i < 4; ++i)
      if (scan.bound_terms[i] && !(scan.empty && options_.inline_ids))
        b.conditions.push_back(t + "." + kCols[i] + " = " + term_value(scan.bound_terms[i], scan.bound_ids[i]));
    return b;
  }

  static std::string strip_parens(const std::string& e) {
    if (e.size() >= 2 && e.front() == '(' && e.back() == ')') return e.substr(1, e.size() - 2);
    return e;
  }

  SqlBlock join_block(const BitJoinOp& join) {
    SqlBlock l = block(*join.left);
    SqlBlock r = block(*join.right);
    SqlBlock b;
    b.from = l.from;
    b.from.insert(b.from.end(), r.from.begin(), r.from.end());

    b.columns = l.columns;
    for (const auto& var : join.graph_keys) {
      const std::string bs = "bs$" + var;
      const std::string anded = "(" + l.column(bs).expr + " & " + r.column(bs).expr + ")";
      for (auto& c : b.columns)
        if (c.name == bs) c.expr = anded;
    }
    for (const auto& pc : physical_columns(join.right->schema))
      if (!find_column(join.left->schema, pc.var)) b.columns.push_back(r.column(pc.name));

    auto is_key = [&](const std::string& column) {
      for (const auto& v : join.graph_keys)
        if (column == "bs$" + v) return true;
      return false;
    };
    for (const auto& var : join.graph_keys)
      b.guards.emplace_back("bs$" + var, "bit_count(" + strip_parens(b.column("bs$" + var).expr) + ") <> 0");
    for (const auto& g : l.guards)
      if (!is_key(g.first)) b.guards.push_back(g);
    for (const auto& g : r.guards)
      if (!is_key(g.first)) b.guards.push_back(g);

    for (const auto& var : join.id_keys) {
      const std::string v = find_column(join.left->schema, var)->id_column();
      b.conditions.push_back(l.column(v).expr + " = " + r.column(v).expr);
    }
    for (const auto& var : join.graph_keys)
      b.conditions.push_back(l.column("ng$" + var).expr + " = " + r.column("ng$" + var).expr);
    b.conditions.insert(b.conditions.end(), l.conditions.begin(), l.conditions.end());
    b.conditions.insert(b.conditions.end(), r.conditions.begin(), r.conditions.end());
    return b;
  }

  SqlBlock lower_block(const LowerOp& lower) {
    const std::string vng = alias();
    SqlBlock b = block(*lower.sub);
    const std::string ng = b.column("ng$" + lower.var).expr;
    const std::string bs = b.column("bs$" + lower.var).expr;
    b.from.push_back("versioned_named_graph " + vng);
    b.conditions.push_back(ng + " = " + vng + ".id_named_graph");
    b.conditions.push_back("get_bit(" + bs + ", " + vng + ".index_version - 1) = 1");

    std::vector<SqlColumn> cols;
    for (const auto& c : b.columns) {
      if (c.name == "ng$" + lower.var) cols.push_back({vng + ".id_versioned_named_graph", "v$" + lower.var});
      else if (c.name != "bs$" + lower.var) cols.push_back(c);
    }
    b.columns = std::move(cols);
    for (auto it = b.guards.begin(); it != b.guards.end(); ++it)
      if (it->first == "bs$" + lower.var) {
        b.guards.erase(it);
        break;
      }
    return b;
  }

  SqlBlock group_block(const GroupByOp& group, const Schema& schema) {
    const std::string outer = alias();
    const std::string inner_alias = alias();
    SqlBlock inner = block(*group.sub);

    std::string multiplicity;
    for (const auto& v : group.multiplicity)
      multiplicity += (multiplicity.empty() ? "" : " * ") + std::string("bit_count(bs$") + v + ")";
    std::string agg;
    if (multiplicity.empty()) agg = "COUNT(*)";
    else if (group.keys.empty()) agg = "COALESCE(SUM(" + multiplicity + "), 0)";
    else agg = "SUM(" + multiplicity + ")";

    std::string select = "SELECT ";
    std::vector<std::string> items;
    for (const auto& k : group.keys) items.push_back(find_column(group.sub->schema, k)->id_column());
    for (const auto& a : group.aggregates) items.push_back(agg + " AS " + a.column);
    for (std::size_t i = 0; i < items.size(); ++i) select += (i ? ", " : "") + items[i];

    std::string text = select + "\nFROM (\n" + indent_lines(render_block(inner), 2) + "\n) " + inner_alias;
    if (!group.keys.empty()) {
      text += "\nGROUP BY (";
      for (std::size_t i = 0; i < group.keys.size(); ++i)
        text += (i ? ", " : "") + find_column(group.sub->schema, group.keys[i])->id_column();
      text += ")";
    }

    SqlBlock b;
    b.from.push_back("(\n" + indent_lines(text, 2) + "\n) " + outer);
    for (const auto& pc : physical_columns(schema)) b.columns.push_back({outer + "." + pc.name, pc.name});
    return b;
  }

  const SqlOptions& options_;
  std::size_t next_alias_ = 0;
};

}  // namespace detail

/// Renders a plan as one PostgreSQL statement. Output is byte-identical for
/// identical plans and options.
inline SqlFragment emit_sql(const PlanNode& plan, const SqlOptions& options = {}) {
  detail::SqlEmitter e(options);
  return e.emit(plan);
}

inline constexpr std::array<std::string_view, 5> kSqlTables = {"resource_or_literal", "version", "versioned_named_graph",
                                                               "versioned_quad", "metadata"};

/// Schema for a store of `versions` versions.
inline std::string emit_schema_ddl(std::size_t versions) {
  const std::string width = std::to_string(std::max<std::size_t>(versions, 1));
  std::string out;
  out += "CREATE TABLE IF NOT EXISTS resource_or_literal (\n"
         "  id_resource_or_literal INTEGER PRIMARY KEY,\n"
         "  name TEXT NOT NULL,\n"
         "  type TEXT NOT NULL,\n"
         "  datatype TEXT,\n"
         "  lang TEXT,\n"
         "  digest CHAR(16) NOT NULL\n"
         ");\n";
  out += "CREATE TABLE IF NOT EXISTS version (\n"
         "  index_version INTEGER PRIMARY KEY,\n"
         "  label TEXT NOT NULL\n"
         ");\n";
  out += "CREATE TABLE IF NOT EXISTS versioned_named_graph (\n"
         "  id_versioned_named_graph INTEGER PRIMARY KEY,\n"
         "  id_named_graph INTEGER NOT NULL,\n"
         "  index_version INTEGER NOT NULL\n"
         ");\n";
  out += "CREATE TABLE IF NOT EXISTS versioned_quad (\n"
         "  id_subject INTEGER NOT NULL,\n"
         "  id_predicate INTEGER NOT NULL,\n"
         "  id_object INTEGER NOT NULL,\n"
         "  id_named_graph INTEGER NOT NULL,\n"
         "  validity BIT(" + width + ") NOT NULL\n"
         ");\n";
  out += "CREATE TABLE IF NOT EXISTS metadata (\n"
         "  id_subject INTEGER NOT NULL,\n"
         "  id_predicate INTEGER NOT NULL,\n"
         "  id_object INTEGER NOT NULL\n"
         ");\n";

  static const char* kOrders[6][3] = {
      {"id_subject", "id_predicate", "id_object"}, {"id_subject", "id_object", "id_predicate"},
      {"id_predicate", "id_object", "id_subject"}, {"id_predicate", "id_subject", "id_object"},
      {"id_object", "id_predicate", "id_subject"}, {"id_object", "id_subject", "id_predicate"},
  };
  static const char* kNames[6] = {"gspo", "gsop", "gpos", "gpso", "gops", "gosp"};
  for (std::size_t i = 0; i < 6; ++i)
    out += std::string("CREATE INDEX IF NOT EXISTS versioned_quad_") + kNames[i] +
           " ON versioned_quad (id_named_graph, " + kOrders[i][0] + ", " + kOrders[i][1] + ", " + kOrders[i][2] +
           ");\n";
  out += "CREATE INDEX IF NOT EXISTS resource_or_literal_digest ON resource_or_literal (digest);\n";
  return out;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_optional(const std::optional<std::string>& s) { return s ? csv_field(*s) : std::string(); }

}  // namespace detail

/// Writes one CSV file per relation (with header) into `dir`, in the
/// format accepted by `COPY ... WITH (FORMAT csv, HEADER true)`; an
/// unquoted empty field is NULL. Returns the written paths.
inline std::vector<std::filesystem::path> export_csv(const Store& store, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](std::string_view table) {
    auto path = dir / (std::string(table) + ".csv");
    written.push_back(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
  };

  {
    auto out = open("resource_or_literal");
    out << "id_resource_or_literal,name,type,datatype,lang,digest\n";
    const auto& terms = store.dictionary().terms();
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const Term& t = terms[i];
      out << (i + 1) << ',' << detail::csv_field(t.lexical) << ',' << sql_term_type(t.kind) << ','
          << detail::csv_optional(t.datatype) << ',' << detail::csv_optional(t.lang) << ','
          << digest_hex(term_digest(t)) << '\n';
    }
  }
  {
    auto out = open("version");
    out << "index_version,label\n";
    for (std::size_t v = 1; v <= store.version_count(); ++v)
      out << v << ',' << detail::csv_field(store.version_label(v)) << '\n';
  }
  {
    auto out = open("versioned_named_graph");
    out << "id_versioned_named_graph,id_named_graph,index_version\n";
    for (const auto& v : store.vngs()) out << v.vng.value << ',' << v.graph.value << ',' << v.version << '\n';
  }
  {
    auto out = open("versioned_quad");
    out << "id_subject,id_predicate,id_object,id_named_graph,validity\n";
    for (const auto& q : store.quads())
      out << q.subject.value << ',' << q.predicate.value << ',' << q.object.value << ',' << q.graph.value << ','
          << q.validity.to_string() << '\n';
  }
  {
    auto out = open("metadata");
    out << "id_subject,id_predicate,id_object\n";
    for (const auto& m : store.metadata())
      out << m.subject.value << ',' << m.predicate.value << ',' << m.object.value << '\n';
  }
  return written;
}

}  // namespace condyr
