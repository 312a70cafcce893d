#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "condyr/executor.hpp"
#include "condyr/flat_oracle.hpp"
#include "condyr/planner.hpp"
#include "condyr/sample.hpp"
#include "condyr/sparql.hpp"
#include "condyr/workload.hpp"

namespace condyr {

struct CheckOutcome {
  std::string name;
  bool ok = false;
  std::string detail;
};

/// Parsed and planned query.
struct Prepared {
  AlgebraPtr algebra;
  PlanPtr plan;
};

inline Prepared prepare(const Store& store, std::string_view text, const ParseOptions& options = {}) {
  Prepared p;
  p.algebra = parse(text, options);
  p.plan = Planner(store).plan(*p.algebra);
  return p;
}

/// Readable form of a flat row: graph variables show "<graph>@version".
inline std::string describe(const FlatRow& row, const Store& store) {
  std::string out = "{";
  bool first = true;
  for (const auto& [var, value] : row.bindings) {
    out += (first ? "" : ", ") + var + "=";
    first = false;
    if (auto* n = std::get_if<std::int64_t>(&value)) {
      out += std::to_string(*n);
      continue;
    }
    const TermId id = std::get<TermId>(value);
    if (auto vng = store.vng_entry(id))
      out += to_ntriples(store.dictionary().resolve(vng->graph)) + "@" + std::to_string(vng->version);
    else
      out += to_ntriples(store.dictionary().resolve(id));
  }
  return out + "}";
}

inline std::vector<std::string> describe_all(const std::vector<FlatRow>& rows, const Store& store) {
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(describe(r, store));
  std::sort(out.begin(), out.end());
  return out;
}

/// Decoded rows as sorted tab-joined text.
inline std::vector<std::string> row_texts(const ResultTable& rt, const Dictionary& dict) {
  std::vector<std::string> out;
  for (const auto& row : decode(rt, dict).rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) line += (i ? "\t" : "") + cell_text(row[i]);
    out.push_back(line);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += "  " + l + "\n";
  return out;
}

inline CheckOutcome expect_lines(std::string name, const std::vector<std::string>& got,
                                 std::vector<std::string> want) {
  std::sort(want.begin(), want.end());
  CheckOutcome c{std::move(name), got == want, {}};
  if (!c.ok) c.detail = "expected:\n" + join_lines(want) + "got:\n" + join_lines(got);
  return c;
}

}  // namespace detail

/// Runs the four sample queries and compares them with the expected tables.
inline std::vector<CheckOutcome> golden_checks(const ExecOptions& exec = {}) {
  const Store store = sample::load();
  const Dictionary& dict = store.dictionary();
  std::vector<CheckOutcome> out;

  auto run = [&](std::string_view q) { return execute(*prepare(store, q).plan, store, nullptr, exec); };

  out.push_back(detail::expect_lines("knows: condensed rows", row_texts(run(sample::kKnows), dict),
                                     {"<:alice>\t<:bob>\t<:g1>\t111", "<:carol>\t<:alice>\t<:g2>\t001",
                                      "<:bob>\t<:carol>\t<:g2>\t011"}));

  out.push_back(detail::expect_lines("knows/likes join: condensed rows", row_texts(run(sample::kKnowsLikes), dict),
                                     {"<:alice>\t<:bob>\t<:g1>\t011\t\"pizza\""}));

  out.push_back(detail::expect_lines(
      "knows/in-version: flattened rows", describe_all(flatten(run(sample::kKnowsInVersion), store), store),
      {"{g=<:g1>@1, o=<:bob>, s=<:alice>, v=\"1\"}", "{g=<:g1>@2, o=<:bob>, s=<:alice>, v=\"2\"}",
       "{g=<:g1>@3, o=<:bob>, s=<:alice>, v=\"3\"}", "{g=<:g2>@3, o=<:alice>, s=<:carol>, v=\"3\"}",
       "{g=<:g2>@2, o=<:carol>, s=<:bob>, v=\"2\"}", "{g=<:g2>@3, o=<:carol>, s=<:bob>, v=\"3\"}"}));

  out.push_back(detail::expect_lines("count by object", row_texts(run(sample::kCountKnown), dict),
                                     {"<:bob>\t3", "<:alice>\t1", "<:carol>\t2"}));
  return out;
}

struct RandomOutcome {
  std::size_t rounds = 0;
  std::size_t failures = 0;
  /// First failing round: store archive, query and both result bags.
  std::string counterexample;
  bool ok() const { return failures == 0; }
};

/// Compares flatten(execute(plan)) with the flat oracle on random stores
/// and queries.
inline RandomOutcome random_rounds(std::size_t rounds, std::uint32_t seed, const ExecOptions& exec = {}) {
  std::mt19937 rng(seed);
  RandomOutcome out;
  for (std::size_t i = 0; i < rounds; ++i) {
    const workload::StoreShape shape = workload::random_shape(rng);
    const Store store = workload::build_store(shape, rng);
    const std::string query = workload::random_query(rng, shape);
    std::vector<FlatRow> got, want;
    std::string error;
    try {
      const Prepared p = prepare(store, query);
      got = flatten(execute(*p.plan, store, nullptr, exec), store);
      want = evaluate(*p.algebra, materialize_flat(store));
    } catch (const std::exception& e) {
      error = e.what();
    }
    ++out.rounds;
    if (error.empty() && same_bag(got, want)) continue;
    if (out.failures++ == 0) {
      std::ostringstream s;
      s << "round " << i << " (seed " << seed << ")\nquery:\n" << query << "store:\n" << store.save_to_string();
      if (!error.empty()) s << "error: " << error << "\n";
      s << "condensed:\n" << detail::join_lines(describe_all(got, store));
      s << "oracle:\n" << detail::join_lines(describe_all(want, store));
      out.counterexample = s.str();
    }
  }
  return out;
}

}  // namespace condyr
