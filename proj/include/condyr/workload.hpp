#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "condyr/store.hpp"
#include "condyr/term.hpp"

namespace condyr::workload {

struct StoreShape {
  std::size_t versions = 3;
  std::size_t quads_per_version = 10;
  std::size_t graphs = 2;
  std::size_t subjects = 6;
  std::size_t predicates = 3;
  /// Fraction of a version's quads carried into the next one.
  double overlap = 0.5;
  /// Cap on distinct quads over all versions; 0 means unbounded.
  std::size_t max_distinct = 0;
};

inline Term subject_term(std::size_t i) { return Term::iri(":s" + std::to_string(i)); }
inline Term predicate_term(std::size_t i) { return Term::iri("ex:p" + std::to_string(i)); }
inline Term graph_term(std::size_t i) { return Term::iri(":g" + std::to_string(i)); }
inline Term literal_term(std::size_t i) { return Term::literal("lit" + std::to_string(i)); }

/// Snapshots where each version keeps about `overlap` of the previous one's
/// quads and draws the rest fresh. Objects mix IRIs and literals.
inline std::vector<std::vector<TermQuad>> snapshots(const StoreShape& shape, std::mt19937& rng) {
  auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::bernoulli_distribution keep(shape.overlap);
  std::bernoulli_distribution literal(0.25);

  auto fresh = [&] {
    Term o = literal(rng) ? literal_term(pick(3)) : subject_term(pick(shape.subjects));
    return TermQuad{subject_term(pick(shape.subjects)), predicate_term(pick(shape.predicates)), std::move(o),
                    graph_term(pick(shape.graphs))};
  };

  std::vector<std::vector<TermQuad>> out;
  std::vector<TermQuad> prev;
  std::vector<TermQuad> distinct;
  auto admit = [&](const TermQuad& q) {
    if (std::find(distinct.begin(), distinct.end(), q) != distinct.end()) return true;
    if (shape.max_distinct && distinct.size() >= shape.max_distinct) return false;
    distinct.push_back(q);
    return true;
  };
  for (std::size_t v = 0; v < shape.versions; ++v) {
    std::vector<TermQuad> cur;
    for (const auto& q : prev)
      if (keep(rng)) cur.push_back(q);
    std::size_t attempts = 0;
    while (cur.size() < shape.quads_per_version && attempts++ < shape.quads_per_version * 20) {
      TermQuad q = fresh();
      if (std::find(cur.begin(), cur.end(), q) == cur.end() && admit(q)) cur.push_back(std::move(q));
    }
    if (cur.empty()) cur.push_back(distinct.empty() ? fresh() : distinct.front());
    if (distinct.empty()) distinct.push_back(cur.front());
    out.push_back(cur);
    prev = std::move(cur);
  }
  return out;
}

inline Store build_store(const StoreShape& shape, std::mt19937& rng) {
  Store store;
  for (const auto& snap : snapshots(shape, rng)) store.ingest_version(snap);
  return store;
}

/// Random shape within 5 versions, 60 distinct quads and 4 graphs.
inline StoreShape random_shape(std::mt19937& rng) {
  auto in = [&rng](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  StoreShape shape;
  shape.versions = in(1, 5);
  shape.graphs = in(1, 4);
  shape.subjects = in(2, 5);
  shape.predicates = in(1, 3);
  shape.quads_per_version = in(2, 16);
  shape.overlap = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  shape.max_distinct = 60;
  return shape;
}

inline Store random_store(std::mt19937& rng) { return build_store(random_shape(rng), rng); }

/// Random query text in the supported subset over the vocabulary of
/// `random_store`: 1 to 3 connected patterns, optionally joined with a
/// metadata pattern, optionally grouped with COUNT.
inline std::string random_query(std::mt19937& rng, const StoreShape& shape = {}) {
  const std::size_t subjects = shape.subjects, predicates = shape.predicates, graphs = shape.graphs;
  auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto chance = [&rng](double p) { return std::bernoulli_distribution(p)(rng); };

  const std::vector<std::string> id_vars = {"a", "b", "c"};
  const std::vector<std::string> graph_vars = {"g", "h"};
  std::vector<std::string> seen;
  auto note = [&seen](const std::string& v) {
    if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
  };

  std::string body;
  const std::size_t n = 1 + pick(3);
  for (std::size_t i = 0; i < n; ++i) {
    std::string graph_var;
    std::string graph;
    const auto g = pick(10);
    if (g < 6) {
      graph_var = graph_vars[g < 4 ? 0 : 1];
      graph = "?" + graph_var;
    } else if (g < 8) {
      graph = "<" + graph_term(pick(graphs)).lexical + ">";
    }  // otherwise a bare triple in the implicit graph

    auto node = [&](bool object) -> std::string {
      if (chance(0.2)) {
        if (object && chance(0.3)) return to_ntriples(literal_term(pick(3)));
        return "<" + subject_term(pick(subjects)).lexical + ">";
      }
      std::string v = id_vars[pick(id_vars.size())];
      // Occasionally reuse another pattern's graph variable as a node.
      if (chance(0.08)) {
        const std::string& other = graph_vars[pick(graph_vars.size())];
        if (other != graph_var) v = other;
      }
      return "?" + v;
    };

    std::string s = node(false);
    std::string p = chance(0.8) ? "<" + predicate_term(pick(predicates)).lexical + ">" : "?p";
    std::string o = node(true);
    // Keep consecutive patterns connected through at least one variable.
    if (i > 0 && !seen.empty()) {
      bool shared = false;
      for (const auto& t : {s, p, o, graph})
        if (t.size() > 1 && t[0] == '?' && std::find(seen.begin(), seen.end(), t.substr(1)) != seen.end())
          shared = true;
      if (!shared) {
        std::string v = seen[pick(seen.size())];
        if (v != graph_var) s = "?" + v;
      }
    }
    for (const auto& t : {s, p, o, graph})
      if (t.size() > 1 && t[0] == '?') note(t.substr(1));
    body += "  " + s + " " + p + " " + o + (graph.empty() ? "" : " " + graph) + " .\n";
  }

  std::vector<std::string> graph_seen;
  for (const auto& v : graph_vars)
    if (std::find(seen.begin(), seen.end(), v) != seen.end()) graph_seen.push_back(v);
  if (!graph_seen.empty() && chance(0.3)) {
    const std::string& gv = graph_seen[pick(graph_seen.size())];
    const bool in_version = chance(0.5);
    const std::string var = in_version ? "ver" : "named";
    body += "  ?" + gv + (in_version ? " <v:in-version> ?" : " <v:version-of> ?") + var + " <ng:Metadata> .\n";
    note(var);
  }

  const std::vector<std::string>& vars = seen;

  if (!vars.empty() && chance(0.3)) {
    const std::string key = vars[pick(vars.size())];
    const std::string arg = chance(0.5) ? "*" : "?" + vars[pick(vars.size())];
    if (chance(0.2)) return "SELECT (COUNT(" + arg + ") AS ?n)\nWHERE {\n" + body + "}\n";
    return "SELECT ?" + key + " (COUNT(" + arg + ") AS ?n)\nWHERE {\n" + body + "}\nGROUP BY ?" + key + "\n";
  }
  if (!vars.empty() && chance(0.4)) {
    std::string select = "SELECT";
    for (const auto& v : vars)
      if (chance(0.5)) select += " ?" + v;
    if (select == "SELECT") select += " ?" + vars.front();
    return select + "\nWHERE {\n" + body + "}\n";
  }
  return chance(0.5) ? "SELECT *\nWHERE {\n" + body + "}\n" : body;
}

}  // namespace condyr::workload
