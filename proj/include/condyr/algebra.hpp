#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "condyr/term.hpp"

namespace condyr {

/// Query variable, stored without its '?' / '$' sigil.
///
/// Names starting with '$' are internal (for instance the graph variable
/// given to bare triple patterns); user syntax can never produce them.
struct Variable {
  std::string name;
  friend bool operator==(const Variable&, const Variable&) = default;
};

inline bool is_hidden_variable(std::string_view name) { return !name.empty() && name.front() == '$'; }

/// Graph position marker for the reserved metadata graph.
struct MetadataGraph {
  friend bool operator==(const MetadataGraph&, const MetadataGraph&) = default;
};

using PatternTerm = std::variant<Variable, Term>;
using GraphTerm = std::variant<Variable, Term, MetadataGraph>;

struct QuadPattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;
  GraphTerm graph;

  bool targets_metadata() const { return std::holds_alternative<MetadataGraph>(graph); }
  friend bool operator==(const QuadPattern&, const QuadPattern&) = default;
};

struct AlgebraNode;
using AlgebraPtr = std::shared_ptr<const AlgebraNode>;

struct JoinOp {
  AlgebraPtr left;
  AlgebraPtr right;
};

/// COUNT(?argument), or COUNT(*) when argument is empty.
struct Aggregate {
  std::string alias;
  std::optional<std::string> argument;
  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct GroupOp {
  AlgebraPtr sub;
  std::vector<std::string> keys;
  std::vector<Aggregate> aggregates;
};

struct ProjectOp {
  AlgebraPtr sub;
  std::vector<std::string> vars;
};

struct AlgebraNode {
  std::variant<QuadPattern, JoinOp, GroupOp, ProjectOp> op;
};

inline AlgebraPtr make_pattern(QuadPattern qp) { return std::make_shared<AlgebraNode>(AlgebraNode{std::move(qp)}); }
inline AlgebraPtr make_join(AlgebraPtr l, AlgebraPtr r) {
  return std::make_shared<AlgebraNode>(AlgebraNode{JoinOp{std::move(l), std::move(r)}});
}
inline AlgebraPtr make_group(AlgebraPtr sub, std::vector<std::string> keys, std::vector<Aggregate> aggs) {
  return std::make_shared<AlgebraNode>(AlgebraNode{GroupOp{std::move(sub), std::move(keys), std::move(aggs)}});
}
inline AlgebraPtr make_project(AlgebraPtr sub, std::vector<std::string> vars) {
  return std::make_shared<AlgebraNode>(AlgebraNode{ProjectOp{std::move(sub), std::move(vars)}});
}

/// Deep structural equality.
inline bool operator==(const AlgebraNode& a, const AlgebraNode& b) {
  if (a.op.index() != b.op.index()) return false;
  auto same = [](const AlgebraPtr& x, const AlgebraPtr& y) { return x && y ? *x == *y : x == y; };
  if (auto* qa = std::get_if<QuadPattern>(&a.op)) return *qa == std::get<QuadPattern>(b.op);
  if (auto* ja = std::get_if<JoinOp>(&a.op)) {
    const auto& jb = std::get<JoinOp>(b.op);
    return same(ja->left, jb.left) && same(ja->right, jb.right);
  }
  if (auto* ga = std::get_if<GroupOp>(&a.op)) {
    const auto& gb = std::get<GroupOp>(b.op);
    return ga->keys == gb.keys && ga->aggregates == gb.aggregates && same(ga->sub, gb.sub);
  }
  const auto& pa = std::get<ProjectOp>(a.op);
  const auto& pb = std::get<ProjectOp>(b.op);
  return pa.vars == pb.vars && same(pa.sub, pb.sub);
}

namespace detail {

inline void note_variable(std::vector<std::string>& out, const std::string& name) {
  for (const auto& v : out)
    if (v == name) return;
  out.push_back(name);
}

inline void collect_variables(const AlgebraNode& node, std::vector<std::string>& out) {
  if (auto* qp = std::get_if<QuadPattern>(&node.op)) {
    for (const PatternTerm* t : {&qp->subject, &qp->predicate, &qp->object})
      if (auto* v = std::get_if<Variable>(t)) note_variable(out, v->name);
    if (auto* v = std::get_if<Variable>(&qp->graph)) note_variable(out, v->name);
  } else if (auto* j = std::get_if<JoinOp>(&node.op)) {
    collect_variables(*j->left, out);
    collect_variables(*j->right, out);
  } else if (auto* g = std::get_if<GroupOp>(&node.op)) {
    for (const auto& k : g->keys) note_variable(out, k);
    for (const auto& a : g->aggregates) note_variable(out, a.alias);
  } else {
    for (const auto& v : std::get<ProjectOp>(node.op).vars) note_variable(out, v);
  }
}

inline void collect_patterns(const AlgebraNode& node, std::vector<QuadPattern>& out) {
  if (auto* qp = std::get_if<QuadPattern>(&node.op)) out.push_back(*qp);
  else if (auto* j = std::get_if<JoinOp>(&node.op)) {
    collect_patterns(*j->left, out);
    collect_patterns(*j->right, out);
  } else if (auto* g = std::get_if<GroupOp>(&node.op)) collect_patterns(*g->sub, out);
  else collect_patterns(*std::get<ProjectOp>(node.op).sub, out);
}

}  // namespace detail

/// Variables in scope at `node`'s output, in first-mention order.
inline std::vector<std::string> variables(const AlgebraNode& node) {
  std::vector<std::string> out;
  detail::collect_variables(node, out);
  return out;
}

inline std::vector<std::string> visible_variables(const AlgebraNode& node) {
  std::vector<std::string> out;
  for (auto& v : variables(node))
    if (!is_hidden_variable(v)) out.push_back(std::move(v));
  return out;
}

/// Quad patterns in textual (left-to-right) order.
inline std::vector<QuadPattern> patterns(const AlgebraNode& node) {
  std::vector<QuadPattern> out;
  detail::collect_patterns(node, out);
  return out;
}

/// Canonical query text; parse(to_sparql(t)) reproduces t for every tree
/// the frontend can produce.
inline std::string to_sparql(const AlgebraNode& root, std::string_view metadata_graph_iri) {
  auto term_text = [](const PatternTerm& t) {
    if (auto* v = std::get_if<Variable>(&t)) return "?" + v->name;
    return to_ntriples(std::get<Term>(t));
  };
  std::string body;
  for (const auto& qp : patterns(root)) {
    body += "  " + term_text(qp.subject) + " " + term_text(qp.predicate) + " " + term_text(qp.object);
    if (auto* v = std::get_if<Variable>(&qp.graph)) {
      if (!is_hidden_variable(v->name)) body += " ?" + v->name;
    } else if (auto* t = std::get_if<Term>(&qp.graph)) {
      body += " " + to_ntriples(*t);
    } else {
      body += " <" + std::string(metadata_graph_iri) + ">";
    }
    body += " .\n";
  }

  const auto* project = std::get_if<ProjectOp>(&root.op);
  if (!project) return body;

  const GroupOp* group = std::get_if<GroupOp>(&project->sub->op);
  std::string text = "SELECT";
  for (const auto& var : project->vars) {
    const Aggregate* agg = nullptr;
    if (group)
      for (const auto& a : group->aggregates)
        if (a.alias == var) agg = &a;
    if (agg) text += " (COUNT(" + (agg->argument ? "?" + *agg->argument : std::string("*")) + ") AS ?" + var + ")";
    else text += " ?" + var;
  }
  text += "\nWHERE {\n" + body + "}";
  if (group && !group->keys.empty()) {
    text += "\nGROUP BY";
    for (const auto& k : group->keys) text += " ?" + k;
  }
  return text + "\n";
}

}  // namespace condyr
