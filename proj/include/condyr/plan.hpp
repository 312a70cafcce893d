#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "condyr/algebra.hpp"
#include "condyr/term.hpp"

namespace condyr {

/// Column representation of a variable. Alignment lowers the greater one.
enum class Repr : std::uint8_t { Id = 0, Condensed = 1 };

enum class ValueKind : std::uint8_t { Term, Count };

/// How one variable appears in a plan node's output.
///
/// Id variables occupy a single column `v$name`. Condensed (graph)
/// variables occupy the pair `ng$name` (named graph id) and `bs$name`
/// (validity bitstring).
struct ColumnSpec {
  std::string var;
  Repr repr = Repr::Id;
  ValueKind kind = ValueKind::Term;
  /// Overrides `v$name`, e.g. "agg0" for an aggregate before finalization.
  std::string physical;

  std::string id_column() const { return physical.empty() ? "v$" + var : physical; }
  std::string ng_column() const { return "ng$" + var; }
  std::string bs_column() const { return "bs$" + var; }
  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

using Schema = std::vector<ColumnSpec>;

enum class CellKind : std::uint8_t { Id, Graph, Bits, Count };

struct PhysicalColumn {
  std::string name;
  CellKind kind = CellKind::Id;
  std::string var;
  friend bool operator==(const PhysicalColumn&, const PhysicalColumn&) = default;
};

inline std::vector<PhysicalColumn> physical_columns(const Schema& schema) {
  std::vector<PhysicalColumn> out;
  for (const auto& c : schema) {
    if (c.repr == Repr::Condensed) {
      out.push_back({c.ng_column(), CellKind::Graph, c.var});
      out.push_back({c.bs_column(), CellKind::Bits, c.var});
    } else {
      out.push_back({c.id_column(), c.kind == ValueKind::Count ? CellKind::Count : CellKind::Id, c.var});
    }
  }
  return out;
}

inline const ColumnSpec* find_column(const Schema& schema, const std::string& var) {
  for (const auto& c : schema)
    if (c.var == var) return &c;
  return nullptr;
}

struct PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

enum class ScanSource : std::uint8_t { Quads, Metadata };

/// Access to `versioned_quad` or `metadata` for one quad pattern.
struct ScanOp {
  ScanSource source = ScanSource::Quads;
  /// Constant per position (s, p, o, g) and its dictionary id if known.
  std::array<std::optional<Term>, 4> bound_terms;
  std::array<std::optional<TermId>, 4> bound_ids;
  /// Variable per position; for quads the graph variable may be synthetic.
  std::array<std::optional<std::string>, 4> vars;
  /// A bound term is absent from the dictionary: the scan yields nothing.
  bool empty = false;
};

/// Join whose shared condensed variables combine by bitwise AND.
struct BitJoinOp {
  PlanPtr left;
  PlanPtr right;
  std::vector<std::string> id_keys;
  std::vector<std::string> graph_keys;
};

/// Expands a condensed variable into one row per set bit, bound to the
/// versioned named graph of that (graph, version).
struct LowerOp {
  PlanPtr sub;
  std::string var;
};

struct PlannedAggregate {
  std::string alias;
  std::optional<std::string> argument;
  std::string column;  // agg0, agg1, ...
};

/// Grouping; each input row counts Π popcount(bs) over `multiplicity`.
struct GroupByOp {
  PlanPtr sub;
  std::vector<std::string> keys;
  std::vector<PlannedAggregate> aggregates;
  std::vector<std::string> multiplicity;
};

struct FinalizeOp {
  PlanPtr sub;
  std::vector<std::string> vars;
};

struct PlanNode {
  std::variant<ScanOp, BitJoinOp, LowerOp, GroupByOp, FinalizeOp> op;
  Schema schema;
};

namespace detail {

inline std::string schema_text(const Schema& schema) {
  std::string out;
  for (const auto& c : physical_columns(schema)) out += (out.empty() ? "" : " ") + c.name;
  return out.empty() ? "(no columns)" : out;
}

inline std::string list_text(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out + "]";
}

inline void explain_into(const PlanNode& node, std::size_t depth, std::string& out) {
  out += std::string(depth * 2, ' ');
  if (auto* scan = std::get_if<ScanOp>(&node.op)) {
    out += scan->source == ScanSource::Quads ? "Scan versioned_quad (" : "Scan metadata (";
    const std::size_t n = scan->source == ScanSource::Quads ? 4 : 3;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += ", ";
      if (scan->bound_terms[i]) {
        out += to_ntriples(*scan->bound_terms[i]);
        out += scan->bound_ids[i] ? "#" + std::to_string(scan->bound_ids[i]->value) : "#?";
      } else if (scan->vars[i]) {
        out += "?" + *scan->vars[i];
      } else {
        out += "*";
      }
    }
    out += ")";
    if (scan->empty) out += " empty";
  } else if (auto* join = std::get_if<BitJoinOp>(&node.op)) {
    out += "BitJoin ids=" + list_text(join->id_keys) + " graphs=" + list_text(join->graph_keys);
  } else if (auto* lower = std::get_if<LowerOp>(&node.op)) {
    out += "Lower ?" + lower->var;
  } else if (auto* group = std::get_if<GroupByOp>(&node.op)) {
    std::vector<std::string> aggs;
    for (const auto& a : group->aggregates)
      aggs.push_back(a.column + "=COUNT(" + (a.argument ? "?" + *a.argument : std::string("*")) + ")");
    out += "GroupBy keys=" + list_text(group->keys) + " aggregates=" + list_text(aggs) +
           " multiplicity=" + list_text(group->multiplicity);
  } else {
    out += "Finalize " + list_text(std::get<FinalizeOp>(node.op).vars);
  }
  out += " -> " + schema_text(node.schema) + "\n";

  if (auto* join = std::get_if<BitJoinOp>(&node.op)) {
    explain_into(*join->left, depth + 1, out);
    explain_into(*join->right, depth + 1, out);
  } else if (auto* lower = std::get_if<LowerOp>(&node.op)) {
    explain_into(*lower->sub, depth + 1, out);
  } else if (auto* group = std::get_if<GroupByOp>(&node.op)) {
    explain_into(*group->sub, depth + 1, out);
  } else if (auto* fin = std::get_if<FinalizeOp>(&node.op)) {
    explain_into(*fin->sub, depth + 1, out);
  }
}

}  // namespace detail

/// Deterministic text form: one node per line, children indented.
inline std::string explain(const PlanNode& node) {
  std::string out;
  detail::explain_into(node, 0, out);
  return out;
}

}  // namespace condyr
