#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "condyr/algebra.hpp"
#include "condyr/errors.hpp"
#include "condyr/plan.hpp"
#include "condyr/store.hpp"

namespace condyr {

/// Translates SPARQL algebra into the condensed plan over one store.
///
/// Graph variables of quad patterns become condensed columns; every other
/// variable is an id column. Joins AND the validity of shared graph
/// variables and lower a condensed side when the two inputs disagree on a
/// variable's representation. Translation is deterministic for a given
/// algebra tree and dictionary state.
class Planner {
 public:
  explicit Planner(const Store& store) : store_(store) {}

  /// Full translation, ending in a Finalize node.
  PlanPtr plan(const AlgebraNode& root) {
    anonymous_ = 0;
    if (auto* project = std::get_if<ProjectOp>(&root.op)) return finalize(translate(*project->sub), project->vars);
    return finalize(translate(root), visible_variables(root));
  }

  PlanPtr translate(const AlgebraNode& node) {
    if (auto* qp = std::get_if<QuadPattern>(&node.op)) return plan_quad_pattern(*qp);
    if (auto* join = std::get_if<JoinOp>(&node.op))
      return plan_join(translate(*join->left), translate(*join->right));
    if (auto* group = std::get_if<GroupOp>(&node.op))
      return plan_group(translate(*group->sub), group->keys, group->aggregates);
    const auto& project = std::get<ProjectOp>(node.op);
    return finalize(translate(*project.sub), project.vars);
  }

  PlanPtr plan_quad_pattern(const QuadPattern& qp) {
    ScanOp scan;
    scan.source = qp.targets_metadata() ? ScanSource::Metadata : ScanSource::Quads;
    Schema schema;

    auto add_id = [&](const std::string& var) {
      if (!find_column(schema, var)) schema.push_back({var, Repr::Id, ValueKind::Term, {}});
    };
    auto bind = [&](std::size_t pos, const Term& term) {
      scan.bound_terms[pos] = term;
      scan.bound_ids[pos] = store_.dictionary().lookup(term);
      if (!scan.bound_ids[pos]) scan.empty = true;
    };

    const PatternTerm* positions[3] = {&qp.subject, &qp.predicate, &qp.object};
    for (std::size_t i = 0; i < 3; ++i) {
      if (auto* v = std::get_if<Variable>(positions[i])) {
        scan.vars[i] = v->name;
        add_id(v->name);
      } else {
        bind(i, std::get<Term>(*positions[i]));
      }
    }

    if (scan.source == ScanSource::Quads) {
      std::string graph_var;
      if (auto* v = std::get_if<Variable>(&qp.graph)) {
        graph_var = v->name;
        if (find_column(schema, graph_var))
          throw Error("graph variable ?" + graph_var + " reused inside its own quad pattern");
      } else {
        // Bound graph: validity goes to a fresh hidden variable.
        bind(kGraph, std::get<Term>(qp.graph));
        graph_var = "$q" + std::to_string(anonymous_++);
      }
      scan.vars[kGraph] = graph_var;
      schema.push_back({graph_var, Repr::Condensed, ValueKind::Term, {}});
    }
    return std::make_shared<PlanNode>(PlanNode{std::move(scan), std::move(schema)});
  }

  PlanPtr plan_join(PlanPtr left, PlanPtr right) {
    std::vector<std::string> shared;
    for (const auto& c : left->schema)
      if (find_column(right->schema, c.var)) shared.push_back(c.var);

    for (const auto& var : shared) {
      const Repr l = find_column(left->schema, var)->repr;
      const Repr r = find_column(right->schema, var)->repr;
      if (l < r) right = lower(right, var);
      if (r < l) left = lower(left, var);
    }

    BitJoinOp join{left, right, {}, {}};
    Schema schema = left->schema;
    for (const auto& var : shared) {
      if (find_column(left->schema, var)->repr == Repr::Id) join.id_keys.push_back(var);
      else join.graph_keys.push_back(var);
    }
    for (const auto& c : right->schema)
      if (!find_column(left->schema, c.var)) schema.push_back(c);
    return std::make_shared<PlanNode>(PlanNode{std::move(join), std::move(schema)});
  }

  PlanPtr lower(PlanPtr sub, const std::string& var) {
    const ColumnSpec* col = find_column(sub->schema, var);
    if (!col) throw UnknownVariable(var);
    if (col->repr != Repr::Condensed) throw Error("cannot lower ?" + var + ": not condensed");
    Schema schema = sub->schema;
    for (auto& c : schema)
      if (c.var == var) c.repr = Repr::Id;
    return std::make_shared<PlanNode>(PlanNode{LowerOp{std::move(sub), var}, std::move(schema)});
  }

  PlanPtr plan_group(PlanPtr sub, const std::vector<std::string>& keys, const std::vector<Aggregate>& aggregates) {
    for (const auto& k : keys)
      if (!find_column(sub->schema, k)) throw UnknownVariable(k);
    for (const auto& a : aggregates)
      if (a.argument && !find_column(sub->schema, *a.argument)) throw UnknownVariable(*a.argument);

    for (const auto& k : keys)
      if (find_column(sub->schema, k)->repr == Repr::Condensed) sub = lower(sub, k);

    GroupByOp group{sub, keys, {}, {}};
    for (const auto& c : sub->schema)
      if (c.repr == Repr::Condensed) group.multiplicity.push_back(c.var);

    Schema schema;
    for (const auto& k : keys) schema.push_back({k, Repr::Id, find_column(sub->schema, k)->kind, {}});
    for (std::size_t i = 0; i < aggregates.size(); ++i) {
      const std::string column = "agg" + std::to_string(i);
      group.aggregates.push_back({aggregates[i].alias, aggregates[i].argument, column});
      schema.push_back({aggregates[i].alias, Repr::Id, ValueKind::Count, column});
    }
    return std::make_shared<PlanNode>(PlanNode{std::move(group), std::move(schema)});
  }

  /// Restricts the output to `vars`. Condensed variables that are not kept
  /// are lowered first so each of their versions stays a separate row.
  PlanPtr finalize(PlanPtr sub, const std::vector<std::string>& vars) {
    for (const auto& v : vars)
      if (!find_column(sub->schema, v)) throw UnknownVariable(v);

    std::vector<std::string> dropped;
    for (const auto& c : sub->schema)
      if (c.repr == Repr::Condensed && std::find(vars.begin(), vars.end(), c.var) == vars.end())
        dropped.push_back(c.var);
    for (const auto& v : dropped) sub = lower(sub, v);

    Schema schema;
    for (const auto& v : vars) {
      ColumnSpec c = *find_column(sub->schema, v);
      c.physical.clear();
      schema.push_back(std::move(c));
    }
    return std::make_shared<PlanNode>(PlanNode{FinalizeOp{std::move(sub), vars}, std::move(schema)});
  }

 private:
  const Store& store_;
  std::size_t anonymous_ = 0;
};

}  // namespace condyr
