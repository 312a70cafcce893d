#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "condyr/algebra.hpp"
#include "condyr/errors.hpp"
#include "condyr/executor.hpp"
#include "condyr/store.hpp"

namespace condyr {

/// One (quad, version) pair of the uncondensed baseline.
struct FlatQuad {
  TermId subject;
  TermId predicate;
  TermId object;
  TermId vng;
  TermId graph;
  std::size_t version = 0;
  friend bool operator==(const FlatQuad&, const FlatQuad&) = default;
  friend auto operator<=>(const FlatQuad&, const FlatQuad&) = default;
};

struct FlatStore {
  std::vector<FlatQuad> rows;
  std::vector<MetadataTriple> metadata;
  const Dictionary* dictionary = nullptr;
};

inline FlatStore materialize_flat(const Store& store) {
  FlatStore flat;
  flat.dictionary = &store.dictionary();
  flat.metadata.assign(store.metadata().begin(), store.metadata().end());
  for (const auto& q : store.quads())
    for (auto bit : q.validity.set_positions()) {
      auto vng = store.find_vng(q.graph, bit + 1);
      if (!vng) throw Error("validity bit without a versioned named graph");
      flat.rows.push_back({q.subject, q.predicate, q.object, *vng, q.graph, bit + 1});
    }
  return flat;
}

struct OracleStats {
  std::size_t rows_scanned = 0;
};

namespace detail {

using Solution = std::map<std::string, FlatValue>;

/// Adds var=value to `s`, or checks it against an existing binding.
inline bool bind(Solution& s, const std::string& var, TermId value) {
  auto [it, fresh] = s.emplace(var, value);
  return fresh || it->second == FlatValue{value};
}

class NaiveEvaluator {
 public:
  NaiveEvaluator(const FlatStore& flat, OracleStats& stats) : flat_(flat), stats_(stats) {}

  std::vector<Solution> eval(const AlgebraNode& node) {
    if (auto* qp = std::get_if<QuadPattern>(&node.op)) return match(*qp);
    if (auto* j = std::get_if<JoinOp>(&node.op)) return join(eval(*j->left), eval(*j->right));
    if (auto* g = std::get_if<GroupOp>(&node.op)) return group(*g);
    const auto& p = std::get<ProjectOp>(node.op);
    return project(eval(*p.sub), p.vars);
  }

  static std::vector<Solution> project(const std::vector<Solution>& in, const std::vector<std::string>& vars) {
    std::vector<Solution> out;
    for (const auto& s : in) {
      Solution r;
      for (const auto& v : vars) {
        auto it = s.find(v);
        if (it == s.end()) throw UnknownVariable(v);
        r.emplace(v, it->second);
      }
      out.push_back(std::move(r));
    }
    return out;
  }

 private:
  std::vector<Solution> match(const QuadPattern& qp) {
    // Resolve constants; a constant missing from the dictionary matches nothing.
    std::optional<TermId> ids[4];
    bool impossible = false;
    auto resolve = [&](std::size_t pos, const Term& t) {
      ids[pos] = flat_.dictionary->lookup(t);
      if (!ids[pos]) impossible = true;
    };
    const PatternTerm* spo[3] = {&qp.subject, &qp.predicate, &qp.object};
    for (std::size_t i = 0; i < 3; ++i)
      if (auto* t = std::get_if<Term>(spo[i])) resolve(i, *t);
    if (auto* t = std::get_if<Term>(&qp.graph)) resolve(3, *t);

    auto try_row = [&](TermId s, TermId p, TermId o, std::optional<TermId> vng, std::optional<TermId> graph,
                       std::vector<Solution>& out) {
      const TermId vals[3] = {s, p, o};
      Solution sol;
      for (std::size_t i = 0; i < 3; ++i) {
        if (ids[i] && *ids[i] != vals[i]) return;
        if (auto* v = std::get_if<Variable>(spo[i]); v && !bind(sol, v->name, vals[i])) return;
      }
      if (ids[3] && *ids[3] != *graph) return;
      if (auto* v = std::get_if<Variable>(&qp.graph); v && !bind(sol, v->name, *vng)) return;
      out.push_back(std::move(sol));
    };

    std::vector<Solution> out;
    if (impossible) return out;
    if (qp.targets_metadata()) {
      stats_.rows_scanned += flat_.metadata.size();
      for (const auto& t : flat_.metadata) try_row(t.subject, t.predicate, t.object, std::nullopt, std::nullopt, out);
    } else {
      stats_.rows_scanned += flat_.rows.size();
      for (const auto& r : flat_.rows) try_row(r.subject, r.predicate, r.object, r.vng, r.graph, out);
    }
    return out;
  }

  static std::vector<Solution> join(const std::vector<Solution>& left, const std::vector<Solution>& right) {
    std::vector<Solution> out;
    for (const auto& l : left)
      for (const auto& r : right) {
        Solution merged = l;
        bool ok = true;
        for (const auto& [var, value] : r) {
          auto [it, fresh] = merged.emplace(var, value);
          if (!fresh && it->second != value) {
            ok = false;
            break;
          }
        }
        if (ok) out.push_back(std::move(merged));
      }
    return out;
  }

  std::vector<Solution> group(const GroupOp& g) {
    std::map<std::vector<FlatValue>, std::int64_t> counts;
    for (const auto& s : eval(*g.sub)) {
      std::vector<FlatValue> key;
      for (const auto& k : g.keys) {
        auto it = s.find(k);
        if (it == s.end()) throw UnknownVariable(k);
        key.push_back(it->second);
      }
      for (const auto& a : g.aggregates)
        if (a.argument && !s.count(*a.argument)) throw UnknownVariable(*a.argument);
      ++counts[key];
    }
    if (g.keys.empty() && counts.empty()) counts[{}] = 0;

    std::vector<Solution> out;
    for (const auto& [key, n] : counts) {
      Solution s;
      for (std::size_t i = 0; i < g.keys.size(); ++i) s.emplace(g.keys[i], key[i]);
      for (const auto& a : g.aggregates) s.emplace(a.alias, n);
      out.push_back(std::move(s));
    }
    return out;
  }

  const FlatStore& flat_;
  OracleStats& stats_;
};

}  // namespace detail

/// Nested-loop evaluation over the flat rows. Graph variables bind to
/// versioned named graphs; the output keeps only the projected (or, with no
/// projection, the visible) variables.
inline std::vector<FlatRow> evaluate(const AlgebraNode& root, const FlatStore& flat, OracleStats* stats = nullptr) {
  OracleStats local;
  detail::NaiveEvaluator ev(flat, stats ? *stats : local);
  auto solutions = ev.eval(root);
  if (!std::holds_alternative<ProjectOp>(root.op))
    solutions = detail::NaiveEvaluator::project(solutions, visible_variables(root));
  std::vector<FlatRow> out;
  out.reserve(solutions.size());
  for (auto& s : solutions) out.push_back(FlatRow{std::move(s)});
  return out;
}

}  // namespace condyr
